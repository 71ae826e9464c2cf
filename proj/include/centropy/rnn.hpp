#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "centropy/corpus.hpp"
#include "centropy/nn.hpp"

namespace centropy {

// Word-level recurrent LM with a class-factored softmax:
//   s(t) = sigmoid(U [onehot(w(t-1)); s(t-1)])
//   p(w) = p(class(w) | s(t)) * p(w | class(w), s(t))
// Classes are frequency-balanced: words sorted by training frequency are
// binned so each class carries roughly equal unigram mass.
class RnnModel {
 public:
  RnnModel() = default;
  RnnModel(int vocab_size, int hidden, int n_classes, std::uint64_t init_seed);

  int hidden_size() const { return hidden_; }
  int n_classes() const { return n_classes_; }
  int vocab_size() const { return vocab_size_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  void set_vocab_hash(std::uint64_t h) { vocab_hash_ = h; }

  struct StepTrace {
    std::vector<double> hidden;       // s(t)
    std::vector<double> class_probs;  // over classes
    std::vector<double> word_probs;   // within the target's class
    double prob_true = 0.0;           // p(w_t | history)
  };
  struct Forward {
    std::vector<StepTrace> steps;  // one per predicted token (w_1..w_k, </s>)
    std::vector<double> final_hidden;
  };

  // Hidden state starts at the 0.1-constant vector and is threaded across
  // the sentence; it is never carried across sentences.
  Forward forward(const Sentence& s) const;
  double log_prob(const Sentence& s) const;

  // Probability of every vocabulary word (bos excluded -> 0) at one step;
  // used by normalization tests.
  std::vector<double> full_distribution(const std::vector<double>& hidden) const;

  // Loss = sum of -log p(w_t) over the sentence; gradients via BPTT
  // truncated at `depth` steps. Exposed for gradient checking.
  struct Gradients {
    Matrix d_input;      // vocab x hidden, matches input_weights
    Matrix d_recurrent;  // hidden x hidden
    Matrix d_class;
    Matrix d_output;
  };
  double loss_and_gradients(const Sentence& s, int depth, Gradients* out) const;

  void assign_classes(const std::vector<std::uint64_t>& word_freq);

  const std::vector<int>& word_class() const { return word_class_; }
  const std::vector<std::vector<int>>& class_words() const { return class_words_; }

  Matrix input_weights;      // vocab x hidden; row w = one-hot block column of U
  Matrix recurrent_weights;  // hidden x hidden
  Matrix class_weights;      // n_classes x hidden
  Matrix output_weights;     // vocab x hidden, rows grouped by class at use

  void save(std::ostream& out, const std::string& note) const;
  static RnnModel load(std::istream& in);

 private:
  int vocab_size_ = 0;
  int hidden_ = 0;
  int n_classes_ = 0;
  std::uint64_t vocab_hash_ = 0;
  std::vector<int> word_class_;             // per word id; -1 for <s>
  std::vector<std::vector<int>> class_words_;
  std::vector<int> within_class_index_;

  std::vector<double> step(int prev_word, const std::vector<double>& prev_hidden) const;
};

struct EpochLog {
  int epoch = 0;
  double train_entropy = 0.0;  // nats per predicted token
  double valid_entropy = 0.0;
  double learning_rate = 0.0;
  bool accepted = true;
};

// Trains with truncated BPTT and per-sentence SGD updates. When cfg.lr_decay
// is set, the learning rate halves once validation improvement drops below
// 0.3% per epoch, and training stops below 0.1% (or at max_epochs). Epochs
// that worsen validation entropy are rolled back. Throws NumericalError if
// the loss goes non-finite.
RnnModel rnn_train(const Corpus& train, const Corpus& valid, const SgdConfig& cfg,
                   int hidden, int n_classes, const Vocabulary& vocab,
                   std::vector<EpochLog>* log = nullptr);

}  // namespace centropy
