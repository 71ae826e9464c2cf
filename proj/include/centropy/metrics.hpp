#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "centropy/corpus.hpp"
#include "centropy/distortion.hpp"

namespace centropy {

enum class Unit { kPerWord, kPerSentence };

// Anything that maps a sentence to an unnormalized log-score in nats: the
// true log-probability for word-level models, -S(W) for the sentence RNN.
struct ScoredModel {
  std::function<double(const Sentence&)> scorer;
  Unit unit = Unit::kPerWord;
  bool normalized = false;  // true probabilities; perplexity defined
  std::string label;
};

// exp(-(1/n) log m(T)) with n the word count (plus one </s> per sentence
// when count_eos is set, the default). Throws UsageError for unnormalized
// models: their perplexity is undefined, reports show "-".
double perplexity(const ScoredModel& m, const Corpus& test, bool count_eos = true);

// Word-level cross entropy rate in nats; the quantity perplexity
// exponentiates.
double cross_entropy(const ScoredModel& m, const Corpus& test, bool count_eos = true);

// H_C = (1/N) sum [logscore(original) - logscore(distorted)], N = words
// (per-word unit, including </s> when count_eos) or sentences (per-sentence
// unit).
double contrastive_entropy(const ScoredModel& m, const std::vector<DistortedPair>& pairs,
                           bool count_eos = true);

// H_CR = H_C(d) / H_C(d_b). Throws NumericalError when |H_C(d_b)| < 1e-9.
double contrastive_ratio(double h_c_d, double h_c_base);

enum class Comparison { kHigher, kLower };
enum class RatioComparison { kHigherOrSimilar, kLower };
enum class Verdict { kSuperior, kScalingIssues, kIndeterminate, kInferior };

Verdict verdict(Comparison h_c_cmp, RatioComparison h_cr_cmp);
std::string to_string(Verdict v);

struct MetricsReport {
  std::string label;
  std::optional<double> perplexity;  // absent for unnormalized models
  std::vector<double> levels;        // distortion levels as fractions, sorted
  double base_level = 0.0;
  std::vector<double> h_c_mean;      // per level, nats
  std::vector<double> h_c_stddev;
  std::map<double, double> h_cr;     // level -> ratio vs base (ratio of means)
  int runs = 1;
};

struct EvalOptions {
  std::vector<double> levels;  // fractions, e.g. {0.1, 0.3, 0.5}
  double base_level = 0.1;
  int seeds = 10;
  std::uint64_t seed0 = 1;
  double sub_fraction = 0.5;  // share of d assigned to substitutions
  bool count_eos = true;
  int jobs = 1;  // seeds evaluated concurrently; merge is by seed index
};

// For each seed: distort the test set at every level and compute H_C; report
// per-level means and stddevs and ratio-of-means vs the base level.
MetricsReport averaged_evaluation(const ScoredModel& m, const Corpus& test,
                                  const Vocabulary& vocab, const EvalOptions& opts);

}  // namespace centropy
