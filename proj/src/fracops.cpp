#include "fracvar/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fracvar/gamma.hpp"
#include "fracvar/parallel.hpp"

namespace fracvar {

CaputoL1::CaputoL1(double step, FractionalOrder order, std::size_t n_nodes)
    : weights_(n_nodes), column_(n_nodes) {
  const double alpha = order.value();
  const double beta = 1.0 - alpha;
  scale_ = std::pow(step, -alpha) / gamma(2.0 - alpha);
  for (std::size_t m = 0; m < n_nodes; ++m) {
    const double md = static_cast<double>(m);
    weights_[m] = std::pow(md + 1.0, beta) - (m == 0 ? 0.0 : std::pow(md, beta));
  }
  column_[0] = scale_ * weights_[0];
  for (std::size_t d = 1; d < n_nodes; ++d) column_[d] = scale_ * (weights_[d] - weights_[d - 1]);
}

void CaputoL1::apply(std::span<const double> x, std::span<double> out, unsigned threads) const {
  const std::size_t n = x.size();
  if (n > weights_.size() || out.size() != n) throw std::invalid_argument("CaputoL1: size mismatch");
  if (n == 0) return;
  out[0] = 0.0;
  parallel_for(1, n, threads, [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += weights_[k - 1 - j] * (x[j + 1] - x[j]);
    out[k] = scale_ * acc;
  });
}

namespace {

void check_integral_order(double order) {
  if (!(order > 0.0 && order <= 1.0)) {
    throw std::invalid_argument("RL integral order must lie in (0, 1], got " + std::to_string(order) +
                                " (use rl_integral_order_zero for the order-0 convention)");
  }
}

// Product trapezoid for aI^order on raw samples. Weights follow from
// integrating the kernel exactly against the linear interpolant.
std::vector<double> product_trapezoid(std::span<const double> f, double step, double order, unsigned threads) {
  const std::size_t n = f.size();
  std::vector<double> pw(n + 1), kb(n + 1);
  for (std::size_t m = 0; m <= n; ++m) {
    pw[m] = std::pow(static_cast<double>(m), order + 1.0);
    kb[m] = std::pow(static_cast<double>(m), order);
  }
  const double scale = std::pow(step, order) / gamma(order + 2.0);
  std::vector<double> out(n, 0.0);
  parallel_for(1, n, threads, [&](std::size_t k) {
    const double kd = static_cast<double>(k);
    double acc = (pw[k - 1] - (kd - 1.0 - order) * kb[k]) * f[0];
    for (std::size_t j = 1; j < k; ++j) {
      const std::size_t m = k - j;
      acc += (pw[m + 1] - 2.0 * pw[m] + pw[m - 1]) * f[j];
    }
    acc += f[k];
    out[k] = scale * acc;
  });
  return out;
}

}  // namespace

SampledFunction left_rl_integral(const SampledFunction& f, double order, unsigned threads) {
  check_integral_order(order);
  return SampledFunction(f.grid(), product_trapezoid(f.values(), f.grid().step(), order, threads));
}

SampledFunction right_rl_integral(const SampledFunction& f, double order, unsigned threads) {
  check_integral_order(order);
  std::vector<double> reversed(f.values().rbegin(), f.values().rend());
  auto out = product_trapezoid(reversed, f.grid().step(), order, threads);
  std::reverse(out.begin(), out.end());
  return SampledFunction(f.grid(), std::move(out));
}

SampledFunction rl_integral_order_zero(const SampledFunction& f) { return f; }

SampledFunction left_caputo(const SampledFunction& f, FractionalOrder order, unsigned threads) {
  const CaputoL1 scheme(f.grid().step(), order, f.size());
  std::vector<double> out(f.size());
  scheme.apply(f.values(), out, threads);
  return SampledFunction(f.grid(), std::move(out));
}

SampledFunction right_rl_derivative(const SampledFunction& g, FractionalOrder order, unsigned threads) {
  const std::size_t n = g.size();
  if (n < 5) throw std::invalid_argument("right RL derivative needs at least 5 nodes");
  const auto inner = right_rl_integral(g, 1.0 - order.value(), threads);
  const auto I = inner.values();
  const double two_h = 2.0 * g.grid().step();
  std::vector<double> out(n);
  out[0] = -(-3.0 * I[0] + 4.0 * I[1] - I[2]) / two_h;
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = -(I[k + 1] - I[k - 1]) / two_h;
  out[n - 1] = -(3.0 * I[n - 1] - 4.0 * I[n - 2] + I[n - 3]) / two_h;
  return SampledFunction(g.grid(), std::move(out));
}

double trapezoid(std::span<const double> values, double step) {
  if (values.size() < 2) return 0.0;
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
  return acc * step;
}

double trapezoid(const SampledFunction& f) { return trapezoid(f.values(), f.grid().step()); }

}  // namespace fracvar
