#include "centropy/kn.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iostream>

#include "centropy/errors.hpp"
#include "centropy/model_io.hpp"

namespace centropy {

std::uint64_t pack_context(const int* ctx, int len) {
  assert(len <= 4);
  std::uint64_t key = 0;
  for (int i = 0; i < len; ++i) {
    assert(ctx[i] >= 0 && ctx[i] < 65536);
    key |= static_cast<std::uint64_t>(ctx[i]) << (16 * i);
  }
  return key;
}

namespace {

void unpack_context(std::uint64_t key, int len, int* out) {
  for (int i = 0; i < len; ++i) out[i] = static_cast<int>((key >> (16 * i)) & 0xffff);
}

// Chen-Goodman modified discounts from count-of-counts; any missing
// count-of-count makes the estimate undefined, in which case the caller
// falls back to a flat absolute discount.
bool estimate_discounts(const std::array<std::uint64_t, 5>& n, std::array<double, 3>* d) {
  if (n[1] == 0 || n[2] == 0 || n[3] == 0 || n[4] == 0) return false;
  double y = static_cast<double>(n[1]) / (n[1] + 2.0 * n[2]);
  (*d)[0] = 1.0 - 2.0 * y * n[2] / n[1];
  (*d)[1] = 2.0 - 3.0 * y * n[3] / n[2];
  (*d)[2] = 3.0 - 4.0 * y * n[4] / n[3];
  // Clamp so discounted counts stay non-negative and mass conservation holds.
  // The lower bound stays strictly positive: a zero discount at every bucket
  // of some context would zero its backoff weight and strand unseen words at
  // probability 0.
  (*d)[0] = std::clamp((*d)[0], 0.05, 1.0);
  (*d)[1] = std::clamp((*d)[1], 0.05, 2.0);
  (*d)[2] = std::clamp((*d)[2], 0.05, 3.0);
  return true;
}

}  // namespace

void NGramModel::finalize_tables() {
  discounts_.assign(order_, {0.75, 0.75, 0.75});
  fallback_.assign(order_, false);
  for (int o = 1; o <= order_; ++o) {
    std::array<std::uint64_t, 5> count_of_counts{};  // index 1..4
    for (auto& [key, ctx] : tables_[o - 1]) {
      ctx.total = 0;
      ctx.n1 = ctx.n2 = ctx.n3p = 0;
      for (const auto& [word, c] : ctx.words) {
        ctx.total += c;
        if (c == 1)
          ++ctx.n1;
        else if (c == 2)
          ++ctx.n2;
        else
          ++ctx.n3p;
        if (c >= 1 && c <= 4) ++count_of_counts[c];
      }
    }
    if (!estimate_discounts(count_of_counts, &discounts_[o - 1])) {
      discounts_[o - 1] = {0.75, 0.75, 0.75};
      fallback_[o - 1] = true;
      std::cerr << "[centropy] warning: order-" << o
                << " count-of-counts too sparse for modified KN discounts, "
                   "falling back to absolute discount 0.75\n";
    }
  }
}

NGramModel train_kn(const Corpus& train, int order, const Vocabulary& vocab) {
  if (order < 2) throw UsageError("KN order must be >= 2");
  if (order > 5) throw UsageError("KN order above 5 is not supported");
  if (train.sentences.empty()) throw DataError("cannot train KN on an empty corpus");
  if (vocab.size() >= 65536) throw DataError("vocabulary too large for packed contexts");

  const int bos = vocab.bos_id();
  const int eos = vocab.eos_id();

  // Raw counts at every order; lower orders are replaced by left-continuation
  // counts below.
  std::vector<NGramModel::ContextTable> raw(order);
  std::vector<int> padded;
  for (const auto& s : train.sentences) {
    padded.assign(order - 1, bos);
    padded.insert(padded.end(), s.begin(), s.end());
    padded.push_back(eos);
    for (std::size_t pos = order - 1; pos < padded.size(); ++pos) {
      for (int k = 1; k <= order; ++k) {
        std::uint64_t key = pack_context(&padded[pos - k + 1], k - 1);
        ++raw[k - 1][key].words[padded[pos]];
      }
    }
  }

  NGramModel model;
  model.order_ = order;
  model.vocab_size_ = vocab.size();
  model.vocab_hash_ = vocab.content_hash();
  model.tables_.resize(order);

  // Continuation count of a k-gram = number of distinct raw (k+1)-grams that
  // extend it on the left.
  for (int k = 1; k < order; ++k) {
    NGramModel::ContextTable& cont = model.tables_[k - 1];
    int ids[5];
    for (const auto& [ctx_key, ctx] : raw[k]) {  // order k+1 raw, context length k
      unpack_context(ctx_key, k, ids);
      std::uint64_t suffix_key = pack_context(ids + 1, k - 1);
      for (const auto& [word, c] : ctx.words) ++cont[suffix_key].words[word];
    }
  }
  model.tables_[order - 1] = std::move(raw[order - 1]);

  model.finalize_tables();
  return model;
}

double NGramModel::prob_padded(int word, const int* ctx, int ctx_len) const {
  assert(ctx_len == order_ - 1);
  // Uniform floor over the predictable vocabulary (<s> is never predicted).
  double p = 1.0 / (vocab_size_ - 1);
  for (int o = 1; o <= order_; ++o) {
    std::uint64_t key = pack_context(ctx + (ctx_len - (o - 1)), o - 1);
    auto it = tables_[o - 1].find(key);
    if (it == tables_[o - 1].end() || it->second.total == 0) continue;
    const ContextStats& cs = it->second;
    const auto& d = discounts_[o - 1];
    auto wit = cs.words.find(word);
    double c = wit == cs.words.end() ? 0.0 : static_cast<double>(wit->second);
    double discounted = 0.0;
    if (c > 0.0) discounted = c - d[std::min<int>(static_cast<int>(c), 3) - 1];
    double gamma = (d[0] * cs.n1 + d[1] * cs.n2 + d[2] * cs.n3p) / cs.total;
    p = discounted / cs.total + gamma * p;
  }
  return p;
}

double NGramModel::prob(int word, const Sentence& context) const {
  std::vector<int> ctx(order_ - 1, Vocabulary::kBosId);
  int take = std::min<int>(order_ - 1, static_cast<int>(context.size()));
  for (int i = 0; i < take; ++i)
    ctx[order_ - 2 - i] = context[context.size() - 1 - i];
  return prob_padded(word, ctx.data(), order_ - 1);
}

double NGramModel::sentence_log_prob(const Sentence& s) const {
  std::vector<int> padded(order_ - 1, Vocabulary::kBosId);
  padded.insert(padded.end(), s.begin(), s.end());
  padded.push_back(Vocabulary::kEosId);
  double lp = 0.0;
  for (std::size_t pos = order_ - 1; pos < padded.size(); ++pos)
    lp += std::log(prob_padded(padded[pos], &padded[pos - order_ + 1], order_ - 1));
  return lp;
}

void NGramModel::save(std::ostream& out) const {
  std::string meta = "{\"kind\":\"kn\",\"order\":" + std::to_string(order_) +
                     ",\"vocab_size\":" + std::to_string(vocab_size_) +
                     ",\"vocab_hash\":\"" + std::to_string(vocab_hash_) + "\"}";
  write_container_header(out, meta);
  write_u32(out, static_cast<std::uint32_t>(order_));
  write_u32(out, static_cast<std::uint32_t>(vocab_size_));
  write_u64(out, vocab_hash_);
  for (int o = 1; o <= order_; ++o) {
    const ContextTable& table = tables_[o - 1];
    std::vector<std::uint64_t> keys;
    keys.reserve(table.size());
    for (const auto& [key, ctx] : table) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    write_u64(out, keys.size());
    for (std::uint64_t key : keys) {
      const ContextStats& cs = table.at(key);
      std::vector<std::pair<std::int32_t, std::uint32_t>> words(cs.words.begin(),
                                                               cs.words.end());
      std::sort(words.begin(), words.end());
      write_u64(out, key);
      write_u32(out, static_cast<std::uint32_t>(words.size()));
      for (const auto& [w, c] : words) {
        write_u32(out, static_cast<std::uint32_t>(w));
        write_u32(out, c);
      }
    }
  }
}

NGramModel NGramModel::load(std::istream& in) {
  read_container_header(in);
  NGramModel model;
  model.order_ = static_cast<int>(read_u32(in));
  model.vocab_size_ = static_cast<int>(read_u32(in));
  model.vocab_hash_ = read_u64(in);
  if (model.order_ < 2 || model.order_ > 5) throw DataError("corrupt KN model: bad order");
  model.tables_.resize(model.order_);
  for (int o = 1; o <= model.order_; ++o) {
    std::uint64_t n_contexts = read_u64(in);
    ContextTable& table = model.tables_[o - 1];
    table.reserve(n_contexts);
    for (std::uint64_t i = 0; i < n_contexts; ++i) {
      std::uint64_t key = read_u64(in);
      std::uint32_t n_words = read_u32(in);
      ContextStats& cs = table[key];
      cs.words.reserve(n_words);
      for (std::uint32_t j = 0; j < n_words; ++j) {
        std::int32_t w = static_cast<std::int32_t>(read_u32(in));
        cs.words[w] = read_u32(in);
      }
    }
  }
  model.finalize_tables();
  return model;
}

}  // namespace centropy
