#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "fracvar/expr.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/problem.hpp"

namespace fracvar {

/// x(t) on a uniform grid over [a, T] together with its left Caputo
/// derivative. Immutable: the cached derivative always belongs to the
/// stored values. Edits build a new trajectory.
class SampledTrajectory {
 public:
  SampledTrajectory(UniformGrid grid, std::vector<double> values, FractionalOrder order, unsigned threads = 0);

  const UniformGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> caputo() const { return caputo_; }
  FractionalOrder order() const { return order_; }
  double T() const { return grid_.b(); }
  double terminal_value() const { return values_.back(); }
  std::size_t size() const { return values_.size(); }

  /// Same node values on [a, new_T].
  SampledTrajectory rescaled(double new_T, unsigned threads = 0) const;

 private:
  UniformGrid grid_;
  std::vector<double> values_;
  std::vector<double> caputo_;
  FractionalOrder order_;
};

/// An integrand evaluation failed; carries the node index and the env.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::size_t node, std::string env, const std::string& cause);
  std::size_t node() const { return node_; }
  const std::string& env() const { return env_; }

 private:
  std::size_t node_;
  std::string env_;
};

struct ObjectiveValue {
  double j = 0.0;
  std::vector<double> integrand_samples;
};

struct Gradient {
  /// dJ/dx_i per node; entry 0 is always 0 because x(a) = x_a is fixed.
  std::vector<double> nodes;
  double dJ_dT = 0.0;
};

/// Env for the Lagrangian at one node. Binds phiT = phi(T) when the problem
/// is curve constrained.
Env lagrangian_env(const VariationalProblem& p, double t, double x, double dx, double T);

/// J(x, T) = integral of L[x] over the trajectory grid + phi(T, x(T)).
///
/// Each grid interval (t_{k-1}, t_k] is integrated by the trapezoid rule in
/// (t, x) with dx = D_k, the L1 value at its right node. When L does not
/// depend on dx this is the plain trapezoid rule. integrand_samples holds
/// L(t_k, x_k, D_k) at the nodes.
ObjectiveValue evaluate_functional(const VariationalProblem& p, const SampledTrajectory& x, double T);

/// Central finite differences of the discrete objective.
///
/// Node steps are 1e-6 * max(1, |x_i|). The T step is 1e-5 * (T - a), with
/// node values held while the grid is rescaled; when x(T) is tied to a
/// curve the last node follows the curve, so dJ_dT is the derivative along
/// the admissible set.
Gradient gradient(const VariationalProblem& p, const SampledTrajectory& x, double T, unsigned threads = 0);

}  // namespace fracvar
