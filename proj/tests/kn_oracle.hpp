#pragma once

// Test-only oracle: a direct, from-scratch evaluation of interpolated
// modified Kneser-Ney probabilities. Counts live in ordered maps keyed by
// full token vectors and every query walks the recursion top-down with
// fresh lookups; nothing is shared with the production model.

#include <array>
#include <map>
#include <vector>

#include "centropy/corpus.hpp"

namespace centropy::test {

class KnOracle {
 public:
  KnOracle(const Corpus& corpus, int order, int vocab_size)
      : order_(order), vocab_size_(vocab_size) {
    // Raw counts for every order from <s>-padded sentences.
    std::vector<std::map<std::vector<int>, long>> raw(order + 1);
    for (const auto& s : corpus.sentences) {
      std::vector<int> padded(order - 1, Vocabulary::kBosId);
      padded.insert(padded.end(), s.begin(), s.end());
      padded.push_back(Vocabulary::kEosId);
      for (std::size_t pos = order - 1; pos < padded.size(); ++pos)
        for (int k = 1; k <= order; ++k)
          ++raw[k][std::vector<int>(padded.begin() + pos - k + 1, padded.begin() + pos + 1)];
    }
    counts_.resize(order + 1);
    counts_[order] = raw[order];
    // Left-continuation counts for the lower orders.
    for (int k = 1; k < order; ++k)
      for (const auto& [gram, c] : raw[k + 1])
        ++counts_[k][std::vector<int>(gram.begin() + 1, gram.end())];
    // Per-order modified discounts from count-of-counts.
    discounts_.resize(order + 1);
    for (int k = 1; k <= order; ++k) {
      long n[5] = {0, 0, 0, 0, 0};
      for (const auto& [gram, c] : counts_[k])
        if (c >= 1 && c <= 4) ++n[c];
      if (n[1] == 0 || n[2] == 0 || n[3] == 0 || n[4] == 0) {
        discounts_[k] = {0.75, 0.75, 0.75};
      } else {
        double y = double(n[1]) / (n[1] + 2.0 * n[2]);
        double d1 = 1.0 - 2.0 * y * n[2] / n[1];
        double d2 = 2.0 - 3.0 * y * n[3] / n[2];
        double d3 = 3.0 - 4.0 * y * n[4] / n[3];
        // Same positive lower bound as the model: zero discounts would zero
        // the backoff weight of some contexts.
        discounts_[k] = {std::min(std::max(d1, 0.05), 1.0), std::min(std::max(d2, 0.05), 2.0),
                         std::min(std::max(d3, 0.05), 3.0)};
      }
    }
  }

  // context = preceding tokens (most recent last), padded/truncated by the
  // caller's convention to order-1 entries with <s>.
  double prob(int word, std::vector<int> context) const {
    while (static_cast<int>(context.size()) < order_ - 1)
      context.insert(context.begin(), Vocabulary::kBosId);
    if (static_cast<int>(context.size()) > order_ - 1)
      context.erase(context.begin(), context.end() - (order_ - 1));
    return prob_at(order_, word, context);
  }

  double sentence_log_prob(const Sentence& s) const {
    std::vector<int> history;
    double lp = 0.0;
    for (int w : s) {
      lp += std::log(prob(w, history));
      history.push_back(w);
    }
    lp += std::log(prob(Vocabulary::kEosId, history));
    return lp;
  }

 private:
  double prob_at(int k, int word, const std::vector<int>& context) const {
    if (k == 0) return 1.0 / (vocab_size_ - 1);  // uniform, <s> never predicted
    std::vector<int> ctx(context.end() - (k - 1), context.end());
    // Context total and type counts by scanning the count table.
    long total = 0, n1 = 0, n2 = 0, n3p = 0, c_word = 0;
    for (const auto& [gram, c] : counts_[k]) {
      if (!std::equal(ctx.begin(), ctx.end(), gram.begin())) continue;
      total += c;
      if (c == 1) ++n1;
      else if (c == 2) ++n2;
      else ++n3p;
      if (gram.back() == word) c_word = c;
    }
    if (total == 0) return prob_at(k - 1, word, context);
    const auto& d = discounts_[k];
    double discounted = 0.0;
    if (c_word > 0) discounted = c_word - d[std::min<long>(c_word, 3) - 1];
    double gamma = (d[0] * n1 + d[1] * n2 + d[2] * n3p) / total;
    return discounted / total + gamma * prob_at(k - 1, word, context);
  }

  int order_;
  int vocab_size_;
  std::vector<std::map<std::vector<int>, long>> counts_;
  std::vector<std::array<double, 3>> discounts_;
};

}  // namespace centropy::test
