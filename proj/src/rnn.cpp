#include "centropy/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "centropy/errors.hpp"
#include "centropy/model_io.hpp"

namespace centropy {

namespace {
constexpr double kInitialHidden = 0.1;
constexpr double kGradClip = 15.0;
}  // namespace

RnnModel::RnnModel(int vocab_size, int hidden, int n_classes, std::uint64_t init_seed)
    : vocab_size_(vocab_size), hidden_(hidden), n_classes_(n_classes) {
  std::mt19937_64 rng(init_seed);
  input_weights = Matrix(vocab_size, hidden);
  recurrent_weights = Matrix(hidden, hidden);
  class_weights = Matrix(n_classes, hidden);
  output_weights = Matrix(vocab_size, hidden);
  init_uniform(input_weights, 0.1, rng);
  init_uniform(recurrent_weights, 0.1, rng);
  init_uniform(class_weights, 0.1, rng);
  init_uniform(output_weights, 0.1, rng);
}

void RnnModel::assign_classes(const std::vector<std::uint64_t>& word_freq) {
  if (static_cast<int>(word_freq.size()) != vocab_size_)
    throw UsageError("word frequency table size mismatch");
  std::vector<int> words;  // predictable words only, <s> excluded
  for (int w = 0; w < vocab_size_; ++w)
    if (w != Vocabulary::kBosId) words.push_back(w);
  std::stable_sort(words.begin(), words.end(), [&](int a, int b) {
    return word_freq[a] > word_freq[b];
  });

  int nc = std::min<int>(n_classes_, static_cast<int>(words.size()));
  double total = 0.0;
  for (int w : words) total += static_cast<double>(word_freq[w]);
  if (total == 0.0) total = 1.0;

  // Frequency-balanced binning: roughly equal unigram mass per class.
  std::vector<int> raw_class(vocab_size_, -1);
  double cum = 0.0;
  int cls = 0;
  for (int w : words) {
    raw_class[w] = cls;
    cum += static_cast<double>(word_freq[w]);
    if (cls < nc - 1 && cum >= total * (cls + 1) / nc) ++cls;
  }

  // Compact away any class left empty by a very skewed distribution.
  std::vector<int> remap(nc, -1);
  int next = 0;
  for (int w : words)
    if (remap[raw_class[w]] < 0) remap[raw_class[w]] = next++;
  n_classes_ = next;

  word_class_.assign(vocab_size_, -1);
  class_words_.assign(n_classes_, {});
  within_class_index_.assign(vocab_size_, -1);
  for (int w : words) {
    int c = remap[raw_class[w]];
    word_class_[w] = c;
    within_class_index_[w] = static_cast<int>(class_words_[c].size());
    class_words_[c].push_back(w);
  }
  class_weights = Matrix(n_classes_, hidden_);
  std::mt19937_64 rng(0x9d2c5680u ^ static_cast<std::uint64_t>(n_classes_));
  init_uniform(class_weights, 0.1, rng);
}

std::vector<double> RnnModel::step(int prev_word, const std::vector<double>& prev_hidden) const {
  std::vector<double> pre(hidden_);
  const double* emb = input_weights.row(prev_word);
  for (int i = 0; i < hidden_; ++i) {
    double acc = emb[i];
    const double* rrow = recurrent_weights.row(i);
    for (int j = 0; j < hidden_; ++j) acc += rrow[j] * prev_hidden[j];
    pre[i] = acc;
  }
  return sigmoid_forward(pre);
}

RnnModel::Forward RnnModel::forward(const Sentence& s) const {
  Forward fwd;
  std::vector<int> inputs;
  std::vector<int> targets;
  inputs.push_back(Vocabulary::kBosId);
  for (int w : s) {
    targets.push_back(w);
    inputs.push_back(w);
  }
  targets.push_back(Vocabulary::kEosId);

  std::vector<double> hidden(hidden_, kInitialHidden);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    hidden = step(inputs[t], hidden);
    StepTrace trace;
    trace.hidden = hidden;

    std::vector<double> class_scores(n_classes_);
    for (int c = 0; c < n_classes_; ++c) {
      const double* crow = class_weights.row(c);
      double acc = 0.0;
      for (int i = 0; i < hidden_; ++i) acc += crow[i] * hidden[i];
      class_scores[c] = acc;
    }
    trace.class_probs = softmax_forward(class_scores);

    int target = targets[t];
    int c = word_class_[target];
    if (c < 0) throw UsageError("attempt to predict a non-predictable token");
    const auto& members = class_words_[c];
    std::vector<double> word_scores(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double* wrow = output_weights.row(members[k]);
      double acc = 0.0;
      for (int i = 0; i < hidden_; ++i) acc += wrow[i] * hidden[i];
      word_scores[k] = acc;
    }
    trace.word_probs = softmax_forward(word_scores);
    trace.prob_true = trace.class_probs[c] * trace.word_probs[within_class_index_[target]];
    fwd.steps.push_back(std::move(trace));
  }
  fwd.final_hidden = hidden;
  return fwd;
}

double RnnModel::log_prob(const Sentence& s) const {
  Forward fwd = forward(s);
  double lp = 0.0;
  for (const auto& step : fwd.steps) lp += std::log(step.prob_true);
  return lp;
}

std::vector<double> RnnModel::full_distribution(const std::vector<double>& hidden) const {
  std::vector<double> class_scores(n_classes_);
  for (int c = 0; c < n_classes_; ++c) {
    const double* crow = class_weights.row(c);
    double acc = 0.0;
    for (int i = 0; i < hidden_; ++i) acc += crow[i] * hidden[i];
    class_scores[c] = acc;
  }
  std::vector<double> class_probs = softmax_forward(class_scores);
  std::vector<double> dist(vocab_size_, 0.0);
  for (int c = 0; c < n_classes_; ++c) {
    const auto& members = class_words_[c];
    std::vector<double> scores(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double* wrow = output_weights.row(members[k]);
      double acc = 0.0;
      for (int i = 0; i < hidden_; ++i) acc += wrow[i] * hidden[i];
      scores[k] = acc;
    }
    std::vector<double> probs = softmax_forward(scores);
    for (std::size_t k = 0; k < members.size(); ++k)
      dist[members[k]] = class_probs[c] * probs[k];
  }
  return dist;
}

double RnnModel::loss_and_gradients(const Sentence& s, int depth, Gradients* out) const {
  if (depth < 1) throw UsageError("BPTT depth must be >= 1");
  std::vector<int> inputs;
  std::vector<int> targets;
  inputs.push_back(Vocabulary::kBosId);
  for (int w : s) {
    targets.push_back(w);
    inputs.push_back(w);
  }
  targets.push_back(Vocabulary::kEosId);
  const int T = static_cast<int>(targets.size());

  Forward fwd = forward(s);
  if (out) {
    if (out->d_input.rows != vocab_size_) {
      out->d_input = Matrix(vocab_size_, hidden_);
      out->d_recurrent = Matrix(hidden_, hidden_);
      out->d_class = Matrix(n_classes_, hidden_);
      out->d_output = Matrix(vocab_size_, hidden_);
    } else {
      out->d_input.zero();
      out->d_recurrent.zero();
      out->d_class.zero();
      out->d_output.zero();
    }
  }

  const std::vector<double> initial_hidden(hidden_, kInitialHidden);
  double loss = 0.0;
  std::vector<double> ds(hidden_), ds_pre(hidden_), ds_next(hidden_);
  for (int t = 0; t < T; ++t) {
    const StepTrace& trace = fwd.steps[t];
    loss -= std::log(trace.prob_true);
    if (!out) continue;

    std::fill(ds.begin(), ds.end(), 0.0);
    const int target = targets[t];
    const int c = word_class_[target];

    // Class softmax gradient.
    for (int ci = 0; ci < n_classes_; ++ci) {
      double d = trace.class_probs[ci] - (ci == c ? 1.0 : 0.0);
      double* grow = out->d_class.row(ci);
      const double* crow = class_weights.row(ci);
      for (int i = 0; i < hidden_; ++i) {
        grow[i] += d * trace.hidden[i];
        ds[i] += d * crow[i];
      }
    }
    // Within-class softmax gradient.
    const auto& members = class_words_[c];
    for (std::size_t k = 0; k < members.size(); ++k) {
      double d = trace.word_probs[k] -
                 (static_cast<int>(k) == within_class_index_[target] ? 1.0 : 0.0);
      double* grow = out->d_output.row(members[k]);
      const double* wrow = output_weights.row(members[k]);
      for (int i = 0; i < hidden_; ++i) {
        grow[i] += d * trace.hidden[i];
        ds[i] += d * wrow[i];
      }
    }

    // Backpropagation through time, truncated at `depth` steps.
    for (int tau = t; tau > t - depth && tau >= 0; --tau) {
      const std::vector<double>& h = fwd.steps[tau].hidden;
      const std::vector<double>& h_prev =
          tau == 0 ? initial_hidden : fwd.steps[tau - 1].hidden;
      for (int i = 0; i < hidden_; ++i) ds_pre[i] = ds[i] * h[i] * (1.0 - h[i]);
      double* irow = out->d_input.row(inputs[tau]);
      for (int i = 0; i < hidden_; ++i) {
        irow[i] += ds_pre[i];
        double* rrow = out->d_recurrent.row(i);
        for (int j = 0; j < hidden_; ++j) rrow[j] += ds_pre[i] * h_prev[j];
      }
      if (tau > t - depth + 1 && tau > 0) {
        std::fill(ds_next.begin(), ds_next.end(), 0.0);
        for (int i = 0; i < hidden_; ++i) {
          const double* rrow = recurrent_weights.row(i);
          for (int j = 0; j < hidden_; ++j) ds_next[j] += ds_pre[i] * rrow[j];
        }
        ds.swap(ds_next);
      }
    }
  }
  return loss;
}

namespace {

double corpus_entropy(const RnnModel& m, const Corpus& corpus) {
  double lp = 0.0;
  std::size_t n = 0;
  for (const auto& s : corpus.sentences) {
    lp += m.log_prob(s);
    n += s.size() + 1;  // </s>
  }
  return -lp / static_cast<double>(n);
}

}  // namespace

RnnModel rnn_train(const Corpus& train, const Corpus& valid, const SgdConfig& cfg,
                   int hidden, int n_classes, const Vocabulary& vocab,
                   std::vector<EpochLog>* log) {
  if (train.sentences.empty() || valid.sentences.empty())
    throw DataError("rnn_train needs non-empty train and valid corpora");

  std::vector<std::uint64_t> freq(vocab.size(), 0);
  for (const auto& s : train.sentences) {
    for (int w : s) ++freq[w];
    ++freq[Vocabulary::kEosId];
  }

  RnnModel model(vocab.size(), hidden, n_classes, cfg.seed);
  model.set_vocab_hash(vocab.content_hash());
  model.assign_classes(freq);

  RnnModel best = model;
  double best_valid = corpus_entropy(model, valid);
  double lr = cfg.learning_rate;
  bool halving = false;

  RnnModel::Gradients grads;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    SgdConfig step_cfg = cfg;
    step_cfg.learning_rate = lr;
    double total_loss = 0.0;
    std::size_t total_tokens = 0;
    std::size_t clipped = 0;
    for (const auto& s : train.sentences) {
      double loss = model.loss_and_gradients(s, cfg.bptt_depth, &grads);
      if (!std::isfinite(loss))
        throw NumericalError("rnn_train: non-finite loss, training diverged");
      total_loss += loss;
      total_tokens += s.size() + 1;
      clipped += clip_gradients(grads.d_input, kGradClip);
      clipped += clip_gradients(grads.d_recurrent, kGradClip);
      clipped += clip_gradients(grads.d_class, kGradClip);
      clipped += clip_gradients(grads.d_output, kGradClip);
      sgd_step({&model.input_weights, &model.recurrent_weights, &model.class_weights,
                &model.output_weights},
               {&grads.d_input, &grads.d_recurrent, &grads.d_class, &grads.d_output},
               step_cfg);
    }
    if (clipped > 0)
      std::cerr << "[centropy] rnn epoch " << epoch << ": clipped " << clipped
                << " gradient entries\n";

    double train_entropy = total_loss / static_cast<double>(total_tokens);
    double valid_entropy = corpus_entropy(model, valid);
    if (!std::isfinite(valid_entropy))
      throw NumericalError("rnn_train: non-finite validation entropy");

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_entropy = train_entropy;
    entry.valid_entropy = valid_entropy;
    entry.learning_rate = lr;

    if (valid_entropy > best_valid) {
      // Reject the epoch: restore the best parameters and cut the rate.
      entry.accepted = false;
      model = best;
      if (log) log->push_back(entry);
      if (!cfg.lr_decay) break;  // constant rate would just replay the epoch
      halving = true;
      lr *= 0.5;
      if (lr < 1e-6) break;
      continue;
    }

    double improvement = (best_valid - valid_entropy) / best_valid;
    best_valid = valid_entropy;
    best = model;
    if (log) log->push_back(entry);

    if (cfg.lr_decay) {
      if (halving && improvement < 0.001) break;
      if (improvement < 0.003) {
        halving = true;
        lr *= 0.5;
      }
    }
  }
  return best;
}

void RnnModel::save(std::ostream& out, const std::string& note) const {
  std::string meta = "{\"kind\":\"rnn\",\"hidden\":" + std::to_string(hidden_) +
                     ",\"classes\":" + std::to_string(n_classes_) +
                     ",\"vocab_size\":" + std::to_string(vocab_size_) +
                     ",\"vocab_hash\":\"" + std::to_string(vocab_hash_) +
                     "\",\"note\":\"" + note + "\"}";
  write_container_header(out, meta);
  write_u32(out, static_cast<std::uint32_t>(vocab_size_));
  write_u32(out, static_cast<std::uint32_t>(hidden_));
  write_u32(out, static_cast<std::uint32_t>(n_classes_));
  write_u64(out, vocab_hash_);
  for (int w = 0; w < vocab_size_; ++w)
    write_u32(out, static_cast<std::uint32_t>(word_class_[w] + 1));
  write_matrix(out, input_weights);
  write_matrix(out, recurrent_weights);
  write_matrix(out, class_weights);
  write_matrix(out, output_weights);
}

RnnModel RnnModel::load(std::istream& in) {
  read_container_header(in);
  RnnModel m;
  m.vocab_size_ = static_cast<int>(read_u32(in));
  m.hidden_ = static_cast<int>(read_u32(in));
  m.n_classes_ = static_cast<int>(read_u32(in));
  m.vocab_hash_ = read_u64(in);
  m.word_class_.resize(m.vocab_size_);
  for (int w = 0; w < m.vocab_size_; ++w)
    m.word_class_[w] = static_cast<int>(read_u32(in)) - 1;
  m.input_weights = read_matrix(in);
  m.recurrent_weights = read_matrix(in);
  m.class_weights = read_matrix(in);
  m.output_weights = read_matrix(in);
  m.class_words_.assign(m.n_classes_, {});
  m.within_class_index_.assign(m.vocab_size_, -1);
  for (int w = 0; w < m.vocab_size_; ++w) {
    int c = m.word_class_[w];
    if (c < 0) continue;
    if (c >= m.n_classes_) throw DataError("corrupt RNN model: bad class id");
    m.within_class_index_[w] = static_cast<int>(m.class_words_[c].size());
    m.class_words_[c].push_back(w);
  }
  return m;
}

}  // namespace centropy
