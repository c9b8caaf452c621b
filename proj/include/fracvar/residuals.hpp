#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "fracvar/discretize.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/problem.hpp"

namespace fracvar {

/// Which set of endpoint conditions a report checks.
///   FreeBoth          T and x(T) free (both transversality equations)
///   A                 vertical terminal line, T fixed
///   B                 horizontal terminal line, x(T) fixed
///   C                 terminal curve x(T) = psi(T)
///   CurveConstrained  x(T) = phi(T) with phiT inside L
///   D                 truncated vertical line, x(T) >= x_min
///   E                 truncated horizontal line, T <= T_max
///   InfiniteHorizon   truncated-horizon tail diagnostic
enum class CaseTag { FreeBoth, A, B, C, CurveConstrained, D, E, InfiniteHorizon };

std::string_view case_tag_name(CaseTag tag);

/// s(T') = [tI_{T'}^{1-alpha} dL/d(dx)]_{t=T'} * x(T') over a truncation schedule.
/// The infinite-horizon limit itself is out of reach numerically, so the
/// report is always marked approximate.
struct TailReport {
  std::vector<double> schedule;
  std::vector<double> s_values;
  bool trend_decreasing = false;
  bool approximate = true;
};

/// Endpoint residuals for one candidate (x, T). Only the fields that belong
/// to case_tag are set. The single combined residual of cases C and
/// CurveConstrained is stored in R1.
struct TransversalityReport {
  CaseTag case_tag = CaseTag::FreeBoth;
  std::optional<double> R1;
  std::optional<double> R2;
  std::optional<bool> kkt_sign_ok;
  std::optional<double> complementarity;
  std::optional<bool> constraint_active;
  std::optional<TailReport> tail;
  double I_term = 0.0;    // [tI_T^{1-alpha} dL/d(dx)]_{t=T}
  double xprime_T = 0.0;  // backward-difference x'(T)
  /// On the half of the grid next to T, dL/d(dx) has a node-to-node jump
  /// above 10x the median jump; the bracket extrapolation assumes a smooth
  /// sample near T.
  bool d3l_kink_flagged = false;
};

struct ElResidual {
  SampledFunction values;
  /// Nodes whose stencil touches an endpoint: 0, 1, n-2 and n-1. The right
  /// integral has a (T - t)^(1-alpha) layer at T, and the Caputo samples a
  /// t^(1-alpha) layer at a (with D(a) = 0 by convention); central
  /// differences next to either end cannot resolve them.
  std::vector<std::size_t> flagged;
  double interior_sup = 0.0;
};

/// dL/dx[x](t) + tD_T^alpha(dL/d(dx)[x](t)) at every node.
ElResidual el_residual(const VariationalProblem& p, const SampledTrajectory& x, double T);

/// Discretization error model for the interior EL residual: the largest
/// change, over the fine interior nodes, between the residual and the
/// residual of the same trajectory resampled onto the half-resolution grid
/// (interpolated linearly back to the fine nodes).
double el_error_estimate(const VariationalProblem& p, const SampledTrajectory& x, double T);

/// The bracket [tI_T^{1-alpha} g(t)]_{t=T} for sampled g.
///
/// The one-sided limit of tI_T^{1-alpha} g as t -> T. The product-trapezoid
/// values at T - k h, k = m, 2m, 4m (m = clamp((n - 1) / 16, 1, 4)), are fitted
/// to I + c k^-alpha + d k and I is returned. The k^-alpha term is the grid
/// layer next to T, the linear term the slope of g. For optimal dL/d(dx),
/// which grows like (T - t)^(alpha - 1), this recovers the finite limit; for
/// smooth g it tends to 0 under refinement and to g(T) as alpha -> 1.
/// Needs at least 5 nodes.
double terminal_bracket(const SampledFunction& g, FractionalOrder order);

/// Transversality residuals for the case implied by the problem's terminal
/// condition. InfiniteHorizon reports only I_term and x'(T); use
/// tail_diagnostic for the schedule-level quantity.
TransversalityReport transversality(const VariationalProblem& p, const SampledTrajectory& x, double T);

/// Same quantities evaluated under an explicit case. Throws when the case
/// does not fit the problem (for example C without an endpoint curve).
TransversalityReport transversality_as(CaseTag tag, const VariationalProblem& p, const SampledTrajectory& x, double T);

/// Tail quantity over solutions ordered by increasing truncation time.
/// Needs at least 3 entries. trend_decreasing is true iff |s| does not
/// increase over the last three entries.
TailReport tail_diagnostic(const VariationalProblem& p,
                           const std::vector<std::pair<SampledTrajectory, double>>& solutions);

}  // namespace fracvar
