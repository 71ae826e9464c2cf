#include "centropy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "centropy/errors.hpp"
#include "centropy/rng.hpp"

namespace centropy {

double cross_entropy(const ScoredModel& m, const Corpus& test, bool count_eos) {
  if (test.sentences.empty()) throw DataError("cross_entropy: empty test corpus");
  double lp = 0.0;
  std::size_t n = 0;
  for (const auto& s : test.sentences) {
    lp += m.scorer(s);
    n += s.size() + (count_eos ? 1 : 0);
  }
  return -lp / static_cast<double>(n);
}

double perplexity(const ScoredModel& m, const Corpus& test, bool count_eos) {
  if (!m.normalized)
    throw UsageError("perplexity is undefined for unnormalized model '" + m.label + "'");
  if (m.unit != Unit::kPerWord)
    throw UsageError("perplexity requires a per-word model");
  return std::exp(cross_entropy(m, test, count_eos));
}

double contrastive_entropy(const ScoredModel& m, const std::vector<DistortedPair>& pairs,
                           bool count_eos) {
  if (pairs.empty()) throw DataError("contrastive_entropy: no distorted pairs");
  double diff = 0.0;  // log p(T) - log p(T-hat), in unnormalized log-scores
  std::size_t n = 0;
  for (const auto& pair : pairs) {
    diff += m.scorer(pair.original) - m.scorer(pair.distorted);
    n += m.unit == Unit::kPerWord ? pair.original.size() + (count_eos ? 1 : 0) : 1;
  }
  return diff / static_cast<double>(n);
}

double contrastive_ratio(double h_c_d, double h_c_base) {
  if (std::fabs(h_c_base) < 1e-9)
    throw NumericalError("contrastive ratio undefined: base-level H_C is zero");
  return h_c_d / h_c_base;
}

Verdict verdict(Comparison h_c_cmp, RatioComparison h_cr_cmp) {
  if (h_c_cmp == Comparison::kHigher)
    return h_cr_cmp == RatioComparison::kHigherOrSimilar ? Verdict::kSuperior
                                                         : Verdict::kScalingIssues;
  return h_cr_cmp == RatioComparison::kHigherOrSimilar ? Verdict::kIndeterminate
                                                       : Verdict::kInferior;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kSuperior: return "superior";
    case Verdict::kScalingIssues: return "scaling-issues";
    case Verdict::kIndeterminate: return "indeterminate";
    case Verdict::kInferior: return "inferior";
  }
  return "?";
}

MetricsReport averaged_evaluation(const ScoredModel& m, const Corpus& test,
                                  const Vocabulary& vocab, const EvalOptions& opts) {
  if (opts.levels.empty()) throw UsageError("averaged_evaluation: no distortion levels");
  if (opts.seeds < 1) throw UsageError("averaged_evaluation: seeds must be >= 1");
  std::vector<double> levels = opts.levels;
  std::sort(levels.begin(), levels.end());
  if (std::find(levels.begin(), levels.end(), opts.base_level) == levels.end())
    throw UsageError("averaged_evaluation: base level must be one of the levels");

  // h_c[level][seed]; each seed derives its own channel seed so the ten runs
  // re-sample the distortion.
  std::vector<std::vector<double>> h_c(levels.size(), std::vector<double>(opts.seeds, 0.0));
  auto run_seed = [&](int si) {
    for (std::size_t li = 0; li < levels.size(); ++li) {
      DistortionSpec spec = DistortionSpec::from_level(
          levels[li], opts.sub_fraction, splitmix64(opts.seed0 + 1000003ULL * si));
      auto pairs = distort_corpus(test, spec, vocab);
      h_c[li][si] = contrastive_entropy(m, pairs, opts.count_eos);
    }
  };
  int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (int si = 0; si < opts.seeds; ++si) run_seed(si);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&, t] {
        for (int si = t; si < opts.seeds; si += jobs) run_seed(si);
      });
    for (auto& th : pool) th.join();
  }

  MetricsReport report;
  report.label = m.label;
  report.levels = levels;
  report.base_level = opts.base_level;
  report.runs = opts.seeds;
  if (m.normalized && m.unit == Unit::kPerWord)
    report.perplexity = perplexity(m, test, opts.count_eos);

  for (std::size_t li = 0; li < levels.size(); ++li) {
    double mean = 0.0;
    for (double x : h_c[li]) mean += x;
    mean /= opts.seeds;
    double var = 0.0;
    for (double x : h_c[li]) var += (x - mean) * (x - mean);
    var = opts.seeds > 1 ? var / (opts.seeds - 1) : 0.0;
    report.h_c_mean.push_back(mean);
    report.h_c_stddev.push_back(std::sqrt(var));
  }
  double base_mean = 0.0;
  for (std::size_t li = 0; li < levels.size(); ++li)
    if (levels[li] == opts.base_level) base_mean = report.h_c_mean[li];
  for (std::size_t li = 0; li < levels.size(); ++li) {
    if (levels[li] == opts.base_level) continue;
    // Ratio of per-level means, not mean of per-seed ratios: stable when the
    // base-level H_C is small.
    report.h_cr[levels[li]] = contrastive_ratio(report.h_c_mean[li], base_mean);
  }
  return report;
}

}  // namespace centropy
