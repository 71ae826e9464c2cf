#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "centropy/errors.hpp"
#include "centropy/srnn.hpp"
#include "test_util.hpp"

using namespace centropy;
using centropy::test::make_corpus;
using centropy::test::make_vocab;

namespace {

SrnnModel zero_model(int vocab_size, int latent) {
  SrnnModel m(vocab_size, latent, 1);
  m.recurrent_weights.zero();
  m.input_weights.zero();
  m.score_weights.zero();
  return m;
}

}  // namespace

TEST_CASE("zero score weights give score 0 for every sentence") {
  SrnnModel m(10, 4, 3);
  m.score_weights.zero();
  CHECK(m.score({3}) == 0.0);
  CHECK(m.score({3, 4, 5, 6}) == 0.0);
}

TEST_CASE("one-token score matches the hand-computed fold") {
  // x(1) = sigmoid(R*0 + emb(w)), S = W x(1); set everything by hand.
  SrnnModel m = zero_model(6, 2);
  int w = 4;
  m.input_weights.at(w, 0) = 0.5;
  m.input_weights.at(w, 1) = -1.0;
  m.score_weights.at(0, 0) = 2.0;
  m.score_weights.at(0, 1) = 3.0;
  double x0 = 1.0 / (1.0 + std::exp(-0.5));
  double x1 = 1.0 / (1.0 + std::exp(1.0));
  CHECK(m.score({w}) == doctest::Approx(2.0 * x0 + 3.0 * x1).epsilon(1e-12));
}

TEST_CASE("score is the sum of per-step outputs") {
  SrnnModel m(8, 3, 17);
  Sentence s{3, 5, 4, 7, 6};
  // fold the recurrence by hand and accumulate y(t)
  std::vector<double> x(m.latent_size(), 0.0);
  double total = 0.0;
  Sentence prefix;
  for (int w : s) {
    std::vector<double> nx(m.latent_size());
    for (int i = 0; i < m.latent_size(); ++i) {
      double acc = m.input_weights.at(w, i);
      for (int j = 0; j < m.latent_size(); ++j)
        acc += m.recurrent_weights.at(i, j) * x[j];
      nx[i] = 1.0 / (1.0 + std::exp(-acc));
    }
    x = nx;
    for (int i = 0; i < m.latent_size(); ++i) total += m.score_weights.at(0, i) * x[i];
    prefix.push_back(w);
    // every prefix score is the partial sum of the same fold
    CHECK(m.score(prefix) == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("hinge loss arithmetic on crafted scores") {
  // Saturated embeddings pin the latent to ~0 or ~1, giving S ~= 0 and 2.
  SrnnModel m = zero_model(6, 1);
  m.input_weights.at(3, 0) = -50.0;  // x -> 0, S -> 0
  m.input_weights.at(4, 0) = 50.0;   // x -> 1, S -> 2
  m.score_weights.at(0, 0) = 2.0;

  DistortedPair good{{3}, {4}, 1, 1, 0};  // S(orig)=0, S(dist)=2 -> margin met
  CHECK(srnn_hinge_loss(m, good) == doctest::Approx(0.0).epsilon(1e-9));
  DistortedPair bad{{4}, {3}, 1, 1, 0};   // reversed: loss = 1 + 2 - 0 = 3
  CHECK(srnn_hinge_loss(m, bad) == doctest::Approx(3.0).epsilon(1e-9));
  DistortedPair tie{{3}, {3}, 0, 0, 0};   // equal scores: loss = 1
  CHECK(srnn_hinge_loss(m, tie) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hinge loss rejects length mismatches") {
  SrnnModel m(6, 2, 1);
  DistortedPair pair{{3, 4}, {3}, 0, 0, 0};
  CHECK_THROWS_AS(srnn_hinge_loss(m, pair), UsageError);
}

TEST_CASE("score gradients match finite differences") {
  std::mt19937_64 rng(13);
  for (const auto& s : {Sentence{3, 4, 5}, Sentence{5, 3, 4, 6, 7, 3}}) {
    SrnnModel m(8, 4, 23);
    SrnnModel::Gradients g;
    double score = m.score_and_gradients(s, &g);
    CHECK(score == doctest::Approx(m.score(s)).epsilon(1e-12));
    auto loss = [&]() { return m.score(s); };
    auto res = gradient_check(loss, {&m.recurrent_weights, &m.input_weights, &m.score_weights},
                              {&g.d_recurrent, &g.d_input, &g.d_score}, 1e-5, 40, rng);
    CHECK(res.checked > 0);
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("hinge gradients match finite differences away from the kink") {
  Vocabulary v = make_vocab("a b c d e f", 100);
  std::mt19937_64 rng(29);
  SrnnModel m(v.size(), 3, 41);
  DistortedPair pair{{3, 4, 5, 6}, {3, 7, 5, 8}, 2, 2, 0};
  double loss0 = srnn_hinge_loss(m, pair);
  REQUIRE(loss0 > 1e-2);  // comfortably inside the violating region
  SrnnModel::Gradients go, gd;
  m.score_and_gradients(pair.original, &go);
  m.score_and_gradients(pair.distorted, &gd);
  // d(loss)/d(theta) = dS(orig)/d(theta) - dS(dist)/d(theta) while loss > 0
  Matrix dr = go.d_recurrent, di = go.d_input, ds = go.d_score;
  for (std::size_t i = 0; i < dr.v.size(); ++i) dr.v[i] -= gd.d_recurrent.v[i];
  for (std::size_t i = 0; i < di.v.size(); ++i) di.v[i] -= gd.d_input.v[i];
  for (std::size_t i = 0; i < ds.v.size(); ++i) ds.v[i] -= gd.d_score.v[i];
  auto loss = [&]() { return srnn_hinge_loss(m, pair); };
  auto res = gradient_check(loss, {&m.recurrent_weights, &m.input_weights, &m.score_weights},
                            {&dr, &di, &ds}, 1e-6, 30, rng);
  CHECK(res.checked > 0);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("training drives the mean hinge loss down") {
  Vocabulary v = make_vocab("a b c d e f g h", 100);
  std::string lines;
  const char* pool[] = {"a b c d e", "c d e f g", "e f g h a", "b c d e f",
                        "d e f g h", "f g h a b", "g h a b c", "h a b c d"};
  for (int rep = 0; rep < 16; ++rep)
    for (const char* p : pool) lines += std::string(p) + "\n";
  Corpus train = make_corpus(lines, v);

  DistortionSpec spec = DistortionSpec::from_level(0.5, 0.5, 77);
  SgdConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.l2_coefficient = 1e-5;
  cfg.max_epochs = 6;
  cfg.seed = 4;
  std::vector<HingeBatchStats> stats;
  SrnnModel m = srnn_train(train, spec, cfg, 6, v, &stats);
  REQUIRE(stats.size() == 6);
  CHECK(stats.front().mean_loss >= 0.0);
  int non_increasing = 0;
  for (std::size_t i = 1; i < stats.size(); ++i)
    if (stats[i].mean_loss <= stats[i - 1].mean_loss + 1e-9) ++non_increasing;
  CHECK(non_increasing >= 4);  // of 5 transitions

  // Sign convention: distorted sentences should score (energy) higher, so
  // the training-side contrastive entropy ends positive.
  CHECK(stats.back().train_contrastive_entropy > 0.0);
  CHECK(m.training_distortion_percent() == doctest::Approx(50.0));
}

TEST_CASE("report label encodes latent size and training distortion") {
  SrnnModel m(10, 75, 1);
  m.set_training_distortion_percent(10.0);
  CHECK(m.label() == "sRNN-75(10)");
  m.set_training_distortion_percent(50.0);
  CHECK(m.label() == "sRNN-75(50)");
}

TEST_CASE("srnn serialization round-trips") {
  Vocabulary v = make_vocab("a b c d", 10);
  SrnnModel m(v.size(), 5, 19);
  m.set_vocab_hash(v.content_hash());
  m.set_training_distortion_percent(25.0);
  std::ostringstream s1, s2;
  m.save(s1);
  m.save(s2);
  CHECK(s1.str() == s2.str());
  std::istringstream in(s1.str());
  SrnnModel loaded = SrnnModel::load(in);
  CHECK(loaded.vocab_hash() == v.content_hash());
  CHECK(loaded.training_distortion_percent() == doctest::Approx(25.0));
  for (const auto& s : {Sentence{3, 4}, Sentence{5, 6, 3}})
    CHECK(loaded.score(s) == doctest::Approx(m.score(s)).epsilon(1e-12));
}
