#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace centropy {

// Row-major dense matrix; the only linear algebra both neural models need.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

struct SgdConfig {
  double learning_rate = 0.1;
  double l2_coefficient = 0.0;
  int max_epochs = 20;
  std::uint64_t seed = 1;
  bool lr_decay = false;  // halve lr when validation entropy stalls
  int bptt_depth = 5;
};

// Elementwise 1/(1+e^-x); input pre-activations clamped to [-30, 30] so
// extreme values saturate instead of overflowing.
double sigmoid_scalar(double x);
std::vector<double> sigmoid_forward(const std::vector<double>& v);

// Max-subtracted softmax; output sums to 1 within 1e-9 for any finite input.
std::vector<double> softmax_forward(const std::vector<double>& v);

// p <- p - lr * (g + l2 * p). Throws UsageError on shape mismatch.
void sgd_step(Matrix& params, const Matrix& grads, const SgdConfig& cfg);
void sgd_step(std::vector<Matrix*> params, const std::vector<const Matrix*>& grads,
              const SgdConfig& cfg);

// Clamp every entry of g to [-limit, limit]; returns number of clipped
// entries so training loops can log when it triggers.
std::size_t clip_gradients(Matrix& g, double limit);

void init_uniform(Matrix& m, double scale, std::mt19937_64& rng);

// Central finite differences against analytic gradients over a sampled
// coordinate subset. `loss` evaluates the objective at the current parameter
// values; `grads` are the analytic gradients at the same point. Returns the
// max relative error over sampled coordinates. `skip` (optional) lets the
// caller exclude coordinates, e.g. near a hinge kink.
struct GradientCheckResult {
  double max_rel_err = 0.0;
  int checked = 0;
  int skipped = 0;
};
GradientCheckResult gradient_check(
    const std::function<double()>& loss, std::vector<Matrix*> params,
    const std::vector<const Matrix*>& grads, double h, int max_coords_per_matrix,
    std::mt19937_64& rng,
    const std::function<bool(const Matrix&, int)>& skip = nullptr);

}  // namespace centropy
