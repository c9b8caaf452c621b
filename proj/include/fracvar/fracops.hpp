#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fracvar/grid.hpp"

namespace fracvar {

/// L1 product scheme for the left Caputo derivative on a uniform grid.
///
/// The sampled function is replaced by its piecewise-linear interpolant and
/// the kernel (x - t)^(-alpha) / Gamma(1 - alpha) is integrated exactly
/// against it:
///
///   D_k = h^(-alpha) / Gamma(2 - alpha) * sum_{j<k} b_{k-1-j} (x_{j+1} - x_j)
///   b_m = (m + 1)^(1 - alpha) - m^(1 - alpha)
///
/// D is linear in x; column(d) is dD_{m+d}/dx_m, which is independent of m.
class CaputoL1 {
 public:
  CaputoL1(double step, FractionalOrder order, std::size_t n_nodes);

  /// out[k] = D_k, with D_0 = 0. Summation runs in fixed index order.
  void apply(std::span<const double> x, std::span<double> out, unsigned threads = 0) const;
  double column(std::size_t d) const { return column_[d]; }
  std::size_t size() const { return weights_.size(); }

 private:
  double scale_;
  std::vector<double> weights_;  // b_m
  std::vector<double> column_;
};

/// Left Riemann-Liouville integral aI_x^order f at every node, order in (0, 1].
/// Product trapezoidal rule; exact for piecewise-linear f. Node a maps to 0.
SampledFunction left_rl_integral(const SampledFunction& f, double order, unsigned threads = 0);

/// Right Riemann-Liouville integral xI_b^order f, order in (0, 1]. Node b maps to 0.
SampledFunction right_rl_integral(const SampledFunction& f, double order, unsigned threads = 0);

/// The order-zero convention aI_x^0 f = xI_b^0 f = f.
SampledFunction rl_integral_order_zero(const SampledFunction& f);

/// Left Caputo derivative by the L1 scheme. Vanishes at node a.
SampledFunction left_caputo(const SampledFunction& f, FractionalOrder order, unsigned threads = 0);

/// Right Riemann-Liouville derivative xD_b^alpha g = -(d/dx) xI_b^(1-alpha) g.
///
/// The integral is differenced with central stencils in the interior and
/// second-order one-sided stencils at both ends. Needs at least 5 nodes.
SampledFunction right_rl_derivative(const SampledFunction& g, FractionalOrder order, unsigned threads = 0);

/// Trapezoidal rule over the whole grid.
double trapezoid(const SampledFunction& f);
double trapezoid(std::span<const double> values, double step);

}  // namespace fracvar
