#include "centropy/nn.hpp"

#include <algorithm>
#include <cmath>

#include "centropy/errors.hpp"

namespace centropy {

double sigmoid_scalar(double x) {
  x = std::clamp(x, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-x));
}

std::vector<double> sigmoid_forward(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid_scalar(v[i]);
  return out;
}

std::vector<double> softmax_forward(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

void sgd_step(Matrix& params, const Matrix& grads, const SgdConfig& cfg) {
  if (!params.same_shape(grads)) throw UsageError("sgd_step: parameter/gradient shape mismatch");
  const double lr = cfg.learning_rate;
  const double l2 = cfg.l2_coefficient;
  for (std::size_t i = 0; i < params.v.size(); ++i)
    params.v[i] -= lr * (grads.v[i] + l2 * params.v[i]);
}

void sgd_step(std::vector<Matrix*> params, const std::vector<const Matrix*>& grads,
              const SgdConfig& cfg) {
  if (params.size() != grads.size()) throw UsageError("sgd_step: parameter set size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) sgd_step(*params[i], *grads[i], cfg);
}

std::size_t clip_gradients(Matrix& g, double limit) {
  std::size_t clipped = 0;
  for (double& x : g.v) {
    if (x > limit) {
      x = limit;
      ++clipped;
    } else if (x < -limit) {
      x = -limit;
      ++clipped;
    }
  }
  return clipped;
}

void init_uniform(Matrix& m, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& x : m.v) x = dist(rng);
}

GradientCheckResult gradient_check(const std::function<double()>& loss,
                                   std::vector<Matrix*> params,
                                   const std::vector<const Matrix*>& grads, double h,
                                   int max_coords_per_matrix, std::mt19937_64& rng,
                                   const std::function<bool(const Matrix&, int)>& skip) {
  GradientCheckResult result;
  for (std::size_t mi = 0; mi < params.size(); ++mi) {
    Matrix& p = *params[mi];
    const Matrix& g = *grads[mi];
    std::size_t n = p.v.size();
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    if (static_cast<int>(n) > max_coords_per_matrix) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coords_per_matrix);
    }
    for (std::size_t c : coords) {
      if (skip && skip(p, static_cast<int>(c))) {
        ++result.skipped;
        continue;
      }
      double saved = p.v[c];
      p.v[c] = saved + h;
      double up = loss();
      p.v[c] = saved - h;
      double down = loss();
      p.v[c] = saved;
      double numeric = (up - down) / (2.0 * h);
      double analytic = g.v[c];
      double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1e-8});
      result.max_rel_err = std::max(result.max_rel_err, std::fabs(numeric - analytic) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace centropy
