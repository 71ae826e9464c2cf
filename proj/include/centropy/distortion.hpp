#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "centropy/corpus.hpp"

namespace centropy {

// Word-count-preserving noisy channel: per position the outcome is none,
// substitution or transposition with probabilities (x_none, x_sub, x_trans).
struct DistortionSpec {
  double x_none = 1.0;
  double x_sub = 0.0;
  double x_trans = 0.0;
  std::uint64_t seed = 0;

  // Aggregate distortion level d = x_sub + x_trans.
  double level() const { return x_sub + x_trans; }

  // Splits level d between substitution and transposition; sub_fraction is
  // the share of d spent on substitutions (default symmetric).
  static DistortionSpec from_level(double d, double sub_fraction, std::uint64_t seed);

  // Throws UsageError unless probabilities are non-negative and sum to 1
  // within 1e-12.
  void validate() const;
};

struct DistortedPair {
  Sentence original;
  Sentence distorted;
  int touched = 0;  // positions whose own outcome draw was applied
  int substitutions = 0;
  int transpositions = 0;
};

// Substitution draws a uniformly random non-reserved id different from the
// current token; transposition swaps with a uniformly random other position.
// Degenerate draws (length-1 transposition, no substitution candidate) are
// no-ops and stay untouched.
DistortedPair distort_sentence(const Sentence& s, const DistortionSpec& spec,
                               std::mt19937_64& rng, const Vocabulary& vocab);

// One pair per sentence; the RNG stream for sentence i is substream(seed, i),
// so the result is a pure function of (corpus, spec).
std::vector<DistortedPair> distort_corpus(const Corpus& corpus, const DistortionSpec& spec,
                                          const Vocabulary& vocab);

}  // namespace centropy
