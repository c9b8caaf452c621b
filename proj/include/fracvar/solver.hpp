#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracvar/discretize.hpp"
#include "fracvar/problem.hpp"
#include "fracvar/residuals.hpp"

namespace fracvar {

struct SolverOptions {
  std::size_t n_nodes = 101;
  int max_outer_iters = 200;
  /// BFGS iteration cap for a single fixed-T solve.
  int max_inner_iters = 1000;
  double grad_tol = 1e-6;
  double T_tol = 1e-6;
  std::uint64_t perturbation_seed = 0;
  /// 0 = sequential. Results do not depend on this value.
  unsigned threads = 0;

  /// Throws std::invalid_argument when n_nodes < 11 or a tolerance is not positive.
  void validate() const;
};

/// Reads solver.* keys from a problem file; overrides (key without the
/// "solver." prefix) win. Unknown solver keys are a ProblemError.
SolverOptions solver_options_from(const ProblemConfig& config,
                                  const std::map<std::string, std::string>& overrides = {});

/// Outcome of one fixed-T inner solve.
struct InnerResult {
  SampledTrajectory trajectory;
  double T = 0.0;
  double objective = 0.0;  // J, not sense adjusted
  double grad_norm = 0.0;  // sup-norm over free nodes
  double dJ_dT = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

/// BFGS over the free node values at fixed T, starting from the affine
/// guess x_a -> pinned_end (constant x_a when the end is free). pinned_end
/// holds x(T) fixed.
InnerResult solve_fixed_T(const VariationalProblem& p, double T, const SolverOptions& opts,
                          std::optional<double> pinned_end);

/// Same, with the endpoint rule implied by the terminal condition.
InnerResult solve_fixed_T(const VariationalProblem& p, double T, const SolverOptions& opts);

struct TraceEntry {
  std::string phase;  // scan | golden | polish | fixed | pin | schedule
  double T = 0.0;
  double J = 0.0;
  double grad_norm = 0.0;
  double dJ_dT = 0.0;
  double best_J = 0.0;
  bool inner_converged = false;
};

struct KktRecord {
  std::string constraint;  // "x(T) >= x_min" or "T <= T_max"
  bool active = false;
  double multiplier = 0.0;
  double complementarity = 0.0;
  bool sign_ok = false;
};

struct SolverReport {
  SampledTrajectory trajectory;
  double T_star = 0.0;
  double objective = 0.0;
  TransversalityReport residuals;
  bool converged = false;
  std::vector<TraceEntry> trace;
  std::optional<KktRecord> kkt;
  double el_interior_sup = 0.0;
  double el_error_estimate = 0.0;
  double grad_norm = 0.0;
  double dJ_dT = 0.0;
  /// Why converged is false; empty otherwise.
  std::vector<std::string> notes;
};

/// Finds a stationary (x, T) for the problem's terminal condition.
SolverReport solve(const VariationalProblem& p, const SolverOptions& opts);

}  // namespace fracvar
