#include "centropy/distortion.hpp"

#include <cmath>

#include "centropy/errors.hpp"
#include "centropy/rng.hpp"

namespace centropy {

DistortionSpec DistortionSpec::from_level(double d, double sub_fraction, std::uint64_t seed) {
  if (d < 0.0 || d > 1.0) throw UsageError("distortion level must be in [0,1]");
  if (sub_fraction < 0.0 || sub_fraction > 1.0)
    throw UsageError("substitution fraction must be in [0,1]");
  DistortionSpec spec;
  spec.x_sub = d * sub_fraction;
  spec.x_trans = d - spec.x_sub;
  spec.x_none = 1.0 - d;
  spec.seed = seed;
  return spec;
}

void DistortionSpec::validate() const {
  if (x_none < 0.0 || x_sub < 0.0 || x_trans < 0.0)
    throw UsageError("distortion probabilities must be non-negative");
  if (std::fabs(x_none + x_sub + x_trans - 1.0) > 1e-12)
    throw UsageError("distortion probabilities must sum to 1");
}

namespace {

// Uniform over non-reserved ids excluding `current`; -1 when no candidate
// exists (vocabulary of reserved tokens only).
int draw_substitute(int current, const Vocabulary& vocab, std::mt19937_64& rng) {
  int first = vocab.first_regular_id();
  int n = vocab.size() - first;
  bool current_regular = current >= first;
  int candidates = n - (current_regular ? 1 : 0);
  if (candidates <= 0) return -1;
  std::uniform_int_distribution<int> dist(0, candidates - 1);
  int id = first + dist(rng);
  if (current_regular && id >= current) ++id;
  return id;
}

std::size_t draw_other_index(std::size_t i, std::size_t len, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, len - 2);
  std::size_t j = dist(rng);
  return j >= i ? j + 1 : j;
}

}  // namespace

DistortedPair distort_sentence(const Sentence& s, const DistortionSpec& spec,
                               std::mt19937_64& rng, const Vocabulary& vocab) {
  spec.validate();
  if (s.empty()) throw DataError("cannot distort an empty sentence");
  DistortedPair pair;
  pair.original = s;
  pair.distorted = s;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < pair.distorted.size(); ++i) {
    double u = unif(rng);
    if (u < spec.x_none) continue;
    if (u < spec.x_none + spec.x_sub) {
      int repl = draw_substitute(pair.distorted[i], vocab, rng);
      if (repl < 0) continue;  // degenerate vocabulary, stays untouched
      pair.distorted[i] = repl;
      ++pair.substitutions;
      ++pair.touched;
    } else {
      if (pair.distorted.size() < 2) continue;  // single word, no partner
      std::size_t j = draw_other_index(i, pair.distorted.size(), rng);
      std::swap(pair.distorted[i], pair.distorted[j]);
      ++pair.transpositions;
      ++pair.touched;
    }
  }
  return pair;
}

std::vector<DistortedPair> distort_corpus(const Corpus& corpus, const DistortionSpec& spec,
                                          const Vocabulary& vocab) {
  if (corpus.sentences.empty()) throw DataError("cannot distort an empty corpus");
  spec.validate();
  std::vector<DistortedPair> pairs;
  pairs.reserve(corpus.sentences.size());
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    std::mt19937_64 rng = substream(spec.seed, i);
    pairs.push_back(distort_sentence(corpus.sentences[i], spec, rng, vocab));
  }
  return pairs;
}

}  // namespace centropy
