#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "centropy/corpus.hpp"

namespace centropy {

// Interpolated modified Kneser-Ney n-gram model (Chen-Goodman discounts).
// Raw counts at the highest order, left-continuation counts below, recursive
// interpolation down to a uniform floor over the predictable vocabulary.
class NGramModel {
 public:
  struct ContextStats {
    std::uint32_t total = 0;
    std::uint32_t n1 = 0;   // word types with count 1
    std::uint32_t n2 = 0;   // count 2
    std::uint32_t n3p = 0;  // count >= 3
    std::unordered_map<std::int32_t, std::uint32_t> words;
  };
  using ContextTable = std::unordered_map<std::uint64_t, ContextStats>;

  int order() const { return order_; }
  int vocab_size() const { return vocab_size_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  // Per-order [D1, D2, D3+].
  const std::vector<std::array<double, 3>>& discounts() const { return discounts_; }
  const std::vector<bool>& discount_fallback() const { return fallback_; }

  // p(word | context), context = preceding tokens, most recent last. The
  // context is truncated/padded internally to order-1 tokens with <s>.
  double prob(int word, const Sentence& context) const;

  // Sum of log p over w_1..w_k,</s> with <s>-padded contexts. Natural log,
  // always finite, <= 0.
  double sentence_log_prob(const Sentence& s) const;

  void save(std::ostream& out) const;
  static NGramModel load(std::istream& in);

  friend NGramModel train_kn(const Corpus& train, int order, const Vocabulary& vocab);

 private:
  double prob_padded(int word, const int* ctx, int ctx_len) const;
  void finalize_tables();  // totals, type counts, discounts

  int order_ = 0;
  int vocab_size_ = 0;
  std::uint64_t vocab_hash_ = 0;
  std::vector<ContextTable> tables_;  // index o-1 holds order-o entries
  std::vector<std::array<double, 3>> discounts_;
  std::vector<bool> fallback_;  // order fell back to the flat 0.75 discount
};

// Throws UsageError for order < 2, DataError for an empty corpus. When any
// count-of-counts needed for the modified discounts is zero (tiny corpora),
// that order falls back to a single absolute discount of 0.75 and a warning
// is logged to stderr.
NGramModel train_kn(const Corpus& train, int order, const Vocabulary& vocab);

// Packs up to 4 token ids (16 bits each, position 0 = oldest) into a table
// key; fixed length per order, so no terminator is needed.
std::uint64_t pack_context(const int* ctx, int len);

}  // namespace centropy
