#include "doctest.h"

#include <cmath>

#include "centropy/errors.hpp"
#include "centropy/nn.hpp"

using namespace centropy;

TEST_CASE("sigmoid basics") {
  CHECK(sigmoid_scalar(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid_scalar(1e9) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigmoid_scalar(-1e9) == doctest::Approx(0.0).epsilon(1e-12));
  auto out = sigmoid_forward({0.0, 2.0, -2.0});
  CHECK(out[1] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("sigmoid derivative matches central differences") {
  double x = 0.3, h = 1e-5;
  double numeric = (sigmoid_scalar(x + h) - sigmoid_scalar(x - h)) / (2 * h);
  double s = sigmoid_scalar(x);
  double analytic = s * (1 - s);
  CHECK(std::fabs(numeric - analytic) / analytic < 1e-6);
}

TEST_CASE("softmax is a stable probability simplex point") {
  auto flat = softmax_forward({0.0, 0.0});
  CHECK(flat[0] == doctest::Approx(0.5));
  auto big = softmax_forward({1000.0, 1000.0});
  CHECK(big[0] == doctest::Approx(0.5));
  CHECK(std::isfinite(big[0]));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> v(10);
  for (auto& x : v) x = u(rng);
  auto p = softmax_forward(v);
  double sum = 0;
  for (double x : p) {
    CHECK(x > 0.0);
    sum += x;
  }
  CHECK(std::fabs(sum - 1.0) < 1e-9);
}

TEST_CASE("sgd_step arithmetic") {
  SgdConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.l2_coefficient = 0.0;

  Matrix p(1, 1), g(1, 1);
  p.at(0, 0) = 1.0;
  g.at(0, 0) = 0.0;
  sgd_step(p, g, cfg);
  CHECK(p.at(0, 0) == doctest::Approx(1.0));  // zero grad, zero l2: identity

  p.at(0, 0) = 0.0;
  g.at(0, 0) = 1.0;
  sgd_step(p, g, cfg);
  CHECK(p.at(0, 0) == doctest::Approx(-0.1));

  cfg.l2_coefficient = 1e-3;
  p.at(0, 0) = 1.0;
  g.at(0, 0) = 0.0;
  sgd_step(p, g, cfg);
  CHECK(p.at(0, 0) == doctest::Approx(0.9999));
}

TEST_CASE("sgd_step rejects shape mismatches") {
  SgdConfig cfg;
  Matrix p(2, 2), g(2, 3);
  CHECK_THROWS_AS(sgd_step(p, g, cfg), UsageError);
}

TEST_CASE("gradient clipping clamps and counts") {
  Matrix g(1, 3);
  g.v = {20.0, -20.0, 1.0};
  CHECK(clip_gradients(g, 15.0) == 2);
  CHECK(g.v[0] == 15.0);
  CHECK(g.v[1] == -15.0);
  CHECK(g.v[2] == 1.0);
}

TEST_CASE("gradient check on a quadratic loss") {
  Matrix p(3, 2);
  std::mt19937_64 rng(9);
  init_uniform(p, 1.0, rng);
  Matrix g = p;  // gradient of 0.5 * ||p||^2 is p
  auto loss = [&p]() {
    double acc = 0;
    for (double x : p.v) acc += 0.5 * x * x;
    return acc;
  };
  auto res = gradient_check(loss, {&p}, {&g}, 1e-5, 100, rng);
  CHECK(res.checked == 6);
  CHECK(res.max_rel_err < 1e-8);
}
