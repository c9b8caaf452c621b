#pragma once

// Independent reference values for the fractional operators, computed by
// adaptive double-exponential quadrature of the defining integrals.

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>

namespace oracle {

using Fn = std::function<double(double)>;

inline double integrate(const Fn& f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  return ts.integrate(f, lo, hi, 1e-13);
}

/// int_lo^hi dist(t)^power f(t) dt, where dist is the distance to the upper
/// limit (at_upper) or the lower one. The quadrature passes the exact
/// distance to the nearest endpoint, so the kernel never sees a rounded 0.
inline double integrate_kernel(const Fn& f, double power, double lo, double hi, bool at_upper) {
  if (!(hi > lo)) return 0.0;
  // On a vanishing interval the distances underflow; use the leading term.
  if (hi - lo < 1e-9 * std::max(1.0, std::fabs(hi))) {
    return f(at_upper ? lo : hi) * std::pow(hi - lo, power + 1.0) / (power + 1.0);
  }
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  auto g = [&](double t, double tc) {
    // tc = lo - t (negative) near lo, hi - t (non-negative) near hi.
    double d;
    if (at_upper) {
      d = tc >= 0.0 ? tc : hi - t;
    } else {
      d = tc < 0.0 ? -tc : t - lo;
    }
    return std::pow(d, power) * f(t);
  };
  return ts.integrate(g, lo, hi, 1e-13);
}

/// (1/Gamma(order)) * int_a^x (x - t)^(order - 1) f(t) dt
inline double left_rl_integral(const Fn& f, double order, double a, double x) {
  return integrate_kernel(f, order - 1.0, a, x, true) / std::tgamma(order);
}

/// (1/Gamma(order)) * int_x^b (t - x)^(order - 1) f(t) dt
inline double right_rl_integral(const Fn& f, double order, double x, double b) {
  return integrate_kernel(f, order - 1.0, x, b, false) / std::tgamma(order);
}

/// (1/Gamma(1 - alpha)) * int_a^x (x - t)^(-alpha) f'(t) dt
inline double left_caputo(const Fn& df, double alpha, double a, double x) {
  return integrate_kernel(df, -alpha, a, x, true) / std::tgamma(1.0 - alpha);
}

/// -d/dx of the right integral of order 1 - alpha, after moving the
/// derivative inside: g(b)(b - x)^(-alpha)/Gamma(1 - alpha)
///                    - (1/Gamma(1 - alpha)) int_x^b (t - x)^(-alpha) g'(t) dt.
inline double right_rl_derivative(const Fn& g, const Fn& dg, double alpha, double x, double b) {
  const double boundary = g(b) * std::pow(b - x, -alpha);
  const double inner = integrate_kernel(dg, -alpha, x, b, false);
  return (boundary - inner) / std::tgamma(1.0 - alpha);
}

}  // namespace oracle
