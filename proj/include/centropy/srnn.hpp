#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "centropy/corpus.hpp"
#include "centropy/distortion.hpp"
#include "centropy/nn.hpp"

namespace centropy {

// Sentence-level RNN energy model: phrase vectors composed word by word,
//   x(t) = sigmoid(U [x(t-1); onehot(w(t))]),  y(t) = W x(t),
// sentence score S(W) = sum_t y(t). p(W) is proportional to e^{-S(W)}, so a
// higher score means higher energy / less in-domain; the partition constant
// is never computed (it cancels in contrastive entropy).
class SrnnModel {
 public:
  SrnnModel() = default;
  SrnnModel(int vocab_size, int latent, std::uint64_t init_seed);

  int latent_size() const { return latent_; }
  int vocab_size() const { return vocab_size_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  void set_vocab_hash(std::uint64_t h) { vocab_hash_ = h; }

  // Distortion level negatives were trained against, as a percentage;
  // recorded so reports can label rows like "sRNN-75(10)".
  double training_distortion_percent() const { return training_distortion_pct_; }
  void set_training_distortion_percent(double pct) { training_distortion_pct_ = pct; }
  std::string label() const;

  double score(const Sentence& s) const;

  struct Gradients {
    Matrix d_recurrent;  // latent x latent block of U
    Matrix d_input;      // vocab x latent, matches input_weights
    Matrix d_score;      // 1 x latent
  };
  // d(S)/d(params) via full (non-truncated) backprop; returns the score.
  double score_and_gradients(const Sentence& s, Gradients* out) const;

  Matrix recurrent_weights;  // latent x latent
  Matrix input_weights;      // vocab x latent; row w = one-hot block column of U
  Matrix score_weights;      // 1 x latent

  void save(std::ostream& out) const;
  static SrnnModel load(std::istream& in);

 private:
  int vocab_size_ = 0;
  int latent_ = 0;
  std::uint64_t vocab_hash_ = 0;
  double training_distortion_pct_ = 0.0;
};

// Margin loss max{0, 1 + S(original) - S(distorted)}: the distorted sentence
// must sit at least one unit higher in energy. Asserts equal lengths.
double srnn_hinge_loss(const SrnnModel& m, const DistortedPair& pair);

// Metric-facing alias: the unnormalized per-sentence entropy is the raw
// score (log Z cancels in differences).
inline double srnn_sentence_entropy(const SrnnModel& m, const Sentence& s) { return m.score(s); }

struct HingeBatchStats {
  int epoch = 0;
  double mean_loss = 0.0;
  std::size_t violations = 0;  // pairs with positive loss
  // Mean S(distorted) - S(original) at epoch end over a fixed measurement
  // set of pairs (distorted once with the base channel seed), so the curve
  // tracks model progress rather than per-epoch negative resampling.
  double train_contrastive_entropy = 0.0;
};

// One fresh distorted partner per sentence per epoch (substream keyed by
// epoch and sentence index); SGD update per pair with l2. Throws
// NumericalError on NaN.
SrnnModel srnn_train(const Corpus& train, const DistortionSpec& distortion,
                     const SgdConfig& cfg, int latent, const Vocabulary& vocab,
                     std::vector<HingeBatchStats>* stats = nullptr);

}  // namespace centropy
