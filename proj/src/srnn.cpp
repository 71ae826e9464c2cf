#include "centropy/srnn.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

#include "centropy/errors.hpp"
#include "centropy/model_io.hpp"
#include "centropy/rng.hpp"

namespace centropy {

SrnnModel::SrnnModel(int vocab_size, int latent, std::uint64_t init_seed)
    : vocab_size_(vocab_size), latent_(latent) {
  std::mt19937_64 rng(init_seed);
  recurrent_weights = Matrix(latent, latent);
  input_weights = Matrix(vocab_size, latent);
  score_weights = Matrix(1, latent);
  init_uniform(recurrent_weights, 0.1, rng);
  init_uniform(input_weights, 0.1, rng);
  init_uniform(score_weights, 0.1, rng);
}

std::string SrnnModel::label() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "sRNN-%d(%g)", latent_, training_distortion_pct_);
  return buf;
}

double SrnnModel::score(const Sentence& s) const {
  std::vector<double> x(latent_, 0.0);  // x(0) = zero phrase vector
  std::vector<double> pre(latent_);
  double total = 0.0;
  for (int w : s) {
    const double* emb = input_weights.row(w);
    for (int i = 0; i < latent_; ++i) {
      double acc = emb[i];
      const double* rrow = recurrent_weights.row(i);
      for (int j = 0; j < latent_; ++j) acc += rrow[j] * x[j];
      pre[i] = acc;
    }
    for (int i = 0; i < latent_; ++i) x[i] = sigmoid_scalar(pre[i]);
    const double* srow = score_weights.row(0);
    for (int i = 0; i < latent_; ++i) total += srow[i] * x[i];
  }
  return total;
}

double SrnnModel::score_and_gradients(const Sentence& s, Gradients* out) const {
  const int T = static_cast<int>(s.size());
  std::vector<std::vector<double>> states(T + 1, std::vector<double>(latent_, 0.0));
  double total = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double* emb = input_weights.row(s[t - 1]);
    const std::vector<double>& prev = states[t - 1];
    std::vector<double>& x = states[t];
    for (int i = 0; i < latent_; ++i) {
      double acc = emb[i];
      const double* rrow = recurrent_weights.row(i);
      for (int j = 0; j < latent_; ++j) acc += rrow[j] * prev[j];
      x[i] = sigmoid_scalar(acc);
    }
    const double* srow = score_weights.row(0);
    for (int i = 0; i < latent_; ++i) total += srow[i] * x[i];
  }
  if (!out) return total;

  if (out->d_input.rows != vocab_size_) {
    out->d_input = Matrix(vocab_size_, latent_);
    out->d_recurrent = Matrix(latent_, latent_);
    out->d_score = Matrix(1, latent_);
  } else {
    out->d_input.zero();
    out->d_recurrent.zero();
    out->d_score.zero();
  }

  std::vector<double> dx(latent_, 0.0), dpre(latent_), dx_prev(latent_);
  for (int t = T; t >= 1; --t) {
    const std::vector<double>& x = states[t];
    const std::vector<double>& prev = states[t - 1];
    double* dsrow = out->d_score.row(0);
    const double* srow = score_weights.row(0);
    for (int i = 0; i < latent_; ++i) {
      dsrow[i] += x[i];
      dx[i] += srow[i];
      dpre[i] = dx[i] * x[i] * (1.0 - x[i]);
    }
    double* irow = out->d_input.row(s[t - 1]);
    std::fill(dx_prev.begin(), dx_prev.end(), 0.0);
    for (int i = 0; i < latent_; ++i) {
      irow[i] += dpre[i];
      double* grow = out->d_recurrent.row(i);
      const double* rrow = recurrent_weights.row(i);
      for (int j = 0; j < latent_; ++j) {
        grow[j] += dpre[i] * prev[j];
        dx_prev[j] += dpre[i] * rrow[j];
      }
    }
    dx.swap(dx_prev);
  }
  return total;
}

double srnn_hinge_loss(const SrnnModel& m, const DistortedPair& pair) {
  if (pair.original.size() != pair.distorted.size())
    throw UsageError("hinge pairs must have equal lengths");
  // Margin demands S(distorted) >= S(original) + 1: the distorted sentence
  // must carry strictly higher energy.
  double loss = 1.0 + m.score(pair.original) - m.score(pair.distorted);
  return loss > 0.0 ? loss : 0.0;
}

SrnnModel srnn_train(const Corpus& train, const DistortionSpec& distortion,
                     const SgdConfig& cfg, int latent, const Vocabulary& vocab,
                     std::vector<HingeBatchStats>* stats) {
  if (train.sentences.empty()) throw DataError("srnn_train needs a non-empty corpus");
  distortion.validate();

  SrnnModel model(vocab.size(), latent, cfg.seed);
  model.set_vocab_hash(vocab.content_hash());
  model.set_training_distortion_percent(100.0 * distortion.level());

  // Fixed measurement pairs for the per-epoch training curve: the epoch
  // negatives are resampled, so measuring the margin on them would confound
  // model progress with channel noise.
  std::vector<DistortedPair> curve_pairs = distort_corpus(train, distortion, vocab);

  SrnnModel::Gradients g_orig, g_dist, g_update;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t violations = 0;
    // Fresh negatives each epoch: the channel seed is re-derived per epoch.
    std::uint64_t epoch_seed = splitmix64(distortion.seed ^ (0x5e11ULL * epoch));
    for (std::size_t idx = 0; idx < train.sentences.size(); ++idx) {
      std::mt19937_64 rng = substream(epoch_seed, idx);
      DistortedPair pair = distort_sentence(train.sentences[idx], distortion, rng, vocab);

      double s_orig = model.score(pair.original);
      double s_dist = model.score(pair.distorted);
      if (!std::isfinite(s_orig) || !std::isfinite(s_dist))
        throw NumericalError("srnn_train: non-finite score, training diverged");
      double loss = 1.0 + s_orig - s_dist;

      if (g_update.d_input.rows != vocab.size()) {
        g_update.d_input = Matrix(vocab.size(), latent);
        g_update.d_recurrent = Matrix(latent, latent);
        g_update.d_score = Matrix(1, latent);
      }
      if (loss > 0.0) {
        loss_sum += loss;
        ++violations;
        model.score_and_gradients(pair.original, &g_orig);
        model.score_and_gradients(pair.distorted, &g_dist);
        for (std::size_t i = 0; i < g_update.d_input.v.size(); ++i)
          g_update.d_input.v[i] = g_orig.d_input.v[i] - g_dist.d_input.v[i];
        for (std::size_t i = 0; i < g_update.d_recurrent.v.size(); ++i)
          g_update.d_recurrent.v[i] = g_orig.d_recurrent.v[i] - g_dist.d_recurrent.v[i];
        for (std::size_t i = 0; i < g_update.d_score.v.size(); ++i)
          g_update.d_score.v[i] = g_orig.d_score.v[i] - g_dist.d_score.v[i];
      } else {
        // Hinge subgradient is zero; the step still applies l2 decay.
        g_update.d_input.zero();
        g_update.d_recurrent.zero();
        g_update.d_score.zero();
      }
      sgd_step({&model.input_weights, &model.recurrent_weights, &model.score_weights},
               {&g_update.d_input, &g_update.d_recurrent, &g_update.d_score}, cfg);
    }

    HingeBatchStats entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / static_cast<double>(train.sentences.size());
    entry.violations = violations;
    double margin_sum = 0.0;  // S(distorted) - S(original) on the fixed pairs
    for (const auto& pair : curve_pairs)
      margin_sum += model.score(pair.distorted) - model.score(pair.original);
    entry.train_contrastive_entropy = margin_sum / static_cast<double>(curve_pairs.size());
    if (stats) stats->push_back(entry);
  }
  return model;
}

void SrnnModel::save(std::ostream& out) const {
  char pct[32];
  std::snprintf(pct, sizeof(pct), "%g", training_distortion_pct_);
  std::string meta = "{\"kind\":\"srnn\",\"latent\":" + std::to_string(latent_) +
                     ",\"vocab_size\":" + std::to_string(vocab_size_) +
                     ",\"vocab_hash\":\"" + std::to_string(vocab_hash_) +
                     "\",\"training_distortion_pct\":" + pct +
                     ",\"note\":\"margin trained: minimizes max(0, 1 + S(original) - "
                     "S(distorted))\"}";
  write_container_header(out, meta);
  write_u32(out, static_cast<std::uint32_t>(vocab_size_));
  write_u32(out, static_cast<std::uint32_t>(latent_));
  write_u64(out, vocab_hash_);
  write_f64(out, training_distortion_pct_);
  write_matrix(out, recurrent_weights);
  write_matrix(out, input_weights);
  write_matrix(out, score_weights);
}

SrnnModel SrnnModel::load(std::istream& in) {
  read_container_header(in);
  SrnnModel m;
  m.vocab_size_ = static_cast<int>(read_u32(in));
  m.latent_ = static_cast<int>(read_u32(in));
  m.vocab_hash_ = read_u64(in);
  m.training_distortion_pct_ = read_f64(in);
  m.recurrent_weights = read_matrix(in);
  m.input_weights = read_matrix(in);
  m.score_weights = read_matrix(in);
  return m;
}

}  // namespace centropy
