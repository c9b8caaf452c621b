#include "fracvar/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fracvar/fracops.hpp"

namespace fracvar {

std::string_view case_tag_name(CaseTag tag) {
  switch (tag) {
    case CaseTag::FreeBoth:
      return "FreeBoth";
    case CaseTag::A:
      return "A";
    case CaseTag::B:
      return "B";
    case CaseTag::C:
      return "C";
    case CaseTag::CurveConstrained:
      return "CurveConstrained";
    case CaseTag::D:
      return "D";
    case CaseTag::E:
      return "E";
    case CaseTag::InfiniteHorizon:
      return "InfiniteHorizon";
  }
  return "?";
}

namespace {

struct NodeSamples {
  std::vector<double> L, L_x, L_dx, L_phiT;
};

NodeSamples sample_partials(const VariationalProblem& p, const SampledTrajectory& x, double T) {
  const std::size_t n = x.size();
  NodeSamples s;
  s.L.resize(n);
  s.L_x.resize(n);
  s.L_dx.resize(n);
  s.L_phiT.resize(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const Env env = lagrangian_env(p, x.grid().node(k), x.values()[k], x.caputo()[k], T);
    try {
      s.L[k] = p.L(env);
      s.L_x[k] = p.L_x(env);
      s.L_dx[k] = p.L_dx(env);
      if (p.uses_phiT()) s.L_phiT[k] = p.L_phiT(env);
    } catch (const ExprError& e) {
      throw EvaluationError(k, env.str(), e.what());
    }
  }
  return s;
}

void check_candidate(const VariationalProblem& p, const SampledTrajectory& x, double T) {
  if (x.grid().a() != p.a() || std::fabs(x.grid().b() - T) > 1e-12 * std::max(1.0, std::fabs(T))) {
    throw std::invalid_argument("trajectory grid does not span [a, T]");
  }
  if (x.size() < 5) throw std::invalid_argument("residuals need at least 5 nodes");
}

ElResidual el_from_samples(const SampledTrajectory& x, const NodeSamples& s) {
  const SampledFunction g(x.grid(), s.L_dx);
  const SampledFunction right = right_rl_derivative(g, x.order());
  const std::size_t n = x.size();
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = s.L_x[k] + right[k];
  ElResidual out{SampledFunction(x.grid(), std::move(r)), {0, 1, n - 2, n - 1}, 0.0};
  for (std::size_t k = 2; k + 2 < n; ++k) out.interior_sup = std::max(out.interior_sup, std::fabs(out.values[k]));
  return out;
}

double xprime_backward(const SampledTrajectory& x) {
  const auto v = x.values();
  const std::size_t n = v.size();
  return (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * x.grid().step());
}

// Only the half of the grid next to T is examined: the bracket reads g there,
// and the start of the grid carries the Caputo layer at a.
bool kinked(std::span<const double> g) {
  std::vector<double> jumps;
  jumps.reserve(g.size());
  for (std::size_t k = g.size() / 2; k + 1 < g.size(); ++k) jumps.push_back(std::fabs(g[k + 1] - g[k]));
  if (jumps.empty()) return false;
  const double largest = *std::max_element(jumps.begin(), jumps.end());
  std::nth_element(jumps.begin(), jumps.begin() + jumps.size() / 2, jumps.end());
  const double median = jumps[jumps.size() / 2];
  const double scale = std::max(1.0, *std::max_element(g.begin(), g.end(), [](double a, double b) {
    return std::fabs(a) < std::fabs(b);
  }));
  return largest > 1e-12 * scale && largest > 10.0 * median;
}

// Terminal quantities shared by every case.
struct Terminal {
  double T, xT, L_T, I, xprime, phi_T, phi_xT;
  double R1_free() const { return L_T + phi_T - xprime * I; }
  double R2_free() const { return I + phi_xT; }
};

Terminal terminal_quantities(const VariationalProblem& p, const SampledTrajectory& x, double T,
                             const NodeSamples& s) {
  Terminal q{};
  q.T = T;
  q.xT = x.terminal_value();
  q.L_T = s.L.back();
  q.I = terminal_bracket(SampledFunction(x.grid(), s.L_dx), x.order());
  q.xprime = xprime_backward(x);
  q.phi_T = p.phi_T(T, q.xT);
  q.phi_xT = p.phi_xT(T, q.xT);
  return q;
}

bool near(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); }

CaseTag natural_case(const VariationalProblem& p) {
  return std::visit(
      [](const auto& tc) -> CaseTag {
        using K = std::decay_t<decltype(tc)>;
        if constexpr (std::is_same_v<K, FreeBoth>) return CaseTag::FreeBoth;
        if constexpr (std::is_same_v<K, VerticalLine>) return CaseTag::A;
        if constexpr (std::is_same_v<K, HorizontalLine>) return CaseTag::B;
        if constexpr (std::is_same_v<K, TerminalCurve>) return CaseTag::C;
        if constexpr (std::is_same_v<K, TruncatedVertical>) return CaseTag::D;
        if constexpr (std::is_same_v<K, TruncatedHorizontal>) return CaseTag::E;
        if constexpr (std::is_same_v<K, CurveConstrained>) return CaseTag::CurveConstrained;
        return CaseTag::InfiniteHorizon;
      },
      p.terminal());
}

}  // namespace

double terminal_bracket(const SampledFunction& g, FractionalOrder order) {
  const std::size_t n = g.size();
  if (n < 5) throw std::invalid_argument("terminal bracket needs at least 5 nodes");
  const double alpha = order.value();
  const SampledFunction v = right_rl_integral(g, 1.0 - alpha);
  // Near T the product-trapezoid values carry a layer that decays like
  // k^-alpha in the node distance k from T, for every spacing. Fitting
  // v = I + c k^-alpha + d k at k = m, 2m, 4m removes the layer; the linear
  // term absorbs the slope of g, which dominates as alpha -> 1.
  const std::size_t m = std::clamp<std::size_t>((n - 1) / 16, 1, 4);
  double k[3], val[3], lay[3];
  for (std::size_t j = 0; j < 3; ++j) {
    const std::size_t dist = m << j;
    k[j] = static_cast<double>(dist);
    val[j] = v[n - 1 - dist];
    lay[j] = std::pow(k[j], -alpha);
  }
  const double a11 = lay[0] - lay[1], a12 = k[0] - k[1], b1 = val[0] - val[1];
  const double a21 = lay[1] - lay[2], a22 = k[1] - k[2], b2 = val[1] - val[2];
  const double det = a11 * a22 - a12 * a21;
  const double c = (b1 * a22 - a12 * b2) / det;
  const double d = (a11 * b2 - a21 * b1) / det;
  return val[0] - c * lay[0] - d * k[0];
}

ElResidual el_residual(const VariationalProblem& p, const SampledTrajectory& x, double T) {
  check_candidate(p, x, T);
  return el_from_samples(x, sample_partials(p, x, T));
}

double el_error_estimate(const VariationalProblem& p, const SampledTrajectory& x, double T) {
  check_candidate(p, x, T);
  const ElResidual fine = el_residual(p, x, T);
  const std::size_t n = x.size();
  const std::size_t nc = (n + 1) / 2;
  if (nc < 5) return 0.0;
  const UniformGrid coarse_grid(x.grid().a(), T, nc);
  auto interp = [](std::span<const double> v, double a, double h, double t) {
    const double pos = (t - a) / h;
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(pos))), v.size() - 2);
    const double w = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    return w == 0.0 ? v[i] : (1.0 - w) * v[i] + w * v[i + 1];
  };
  const double a = x.grid().a();
  std::vector<double> cv(nc);
  for (std::size_t i = 0; i < nc; ++i) cv[i] = interp(x.values(), a, x.grid().step(), coarse_grid.node(i));
  cv[0] = x.values()[0];
  cv[nc - 1] = x.terminal_value();
  const SampledTrajectory coarse(coarse_grid, std::move(cv), x.order());
  const ElResidual rc = el_residual(p, coarse, T);
  // Compared at the fine interior nodes; coarse values next to the ends are
  // used as well, so a residual that grows into an endpoint layer is
  // measured against the same layer on the coarse grid.
  double est = 0.0;
  for (std::size_t k = 2; k + 2 < n; ++k) {
    const double t = x.grid().node(k);
    est = std::max(est, std::fabs(fine.values[k] - interp(rc.values.values(), a, coarse_grid.step(), t)));
  }
  return est;
}

TransversalityReport transversality_as(CaseTag tag, const VariationalProblem& p, const SampledTrajectory& x,
                                       double T) {
  check_candidate(p, x, T);
  const NodeSamples s = sample_partials(p, x, T);
  const Terminal q = terminal_quantities(p, x, T, s);

  TransversalityReport rep;
  rep.case_tag = tag;
  rep.I_term = q.I;
  rep.xprime_T = q.xprime;
  rep.d3l_kink_flagged = kinked(s.L_dx);

  switch (tag) {
    case CaseTag::FreeBoth:
      rep.R1 = q.R1_free();
      rep.R2 = q.R2_free();
      break;
    case CaseTag::A:
      rep.R2 = q.R2_free();
      break;
    case CaseTag::B:
      rep.R1 = q.R1_free();
      break;
    case CaseTag::C: {
      if (!std::holds_alternative<TerminalCurve>(p.terminal())) {
        throw std::invalid_argument("case C needs a terminal_curve problem");
      }
      const double psi_prime = p.curve_prime(T);
      rep.R1 = (psi_prime - q.xprime) * (q.I + q.phi_xT) + q.L_T + q.phi_T;
      break;
    }
    case CaseTag::CurveConstrained: {
      if (!p.curve_constrained()) throw std::invalid_argument("case CurveConstrained needs a curve_constrained problem");
      const double phi_prime = p.curve_prime(T);
      const double integral = trapezoid(s.L_phiT, x.grid().step());
      rep.R1 = (phi_prime - q.xprime) * q.I + phi_prime * integral + q.L_T;
      break;
    }
    case CaseTag::D: {
      const auto* tv = std::get_if<TruncatedVertical>(&p.terminal());
      if (!tv) throw std::invalid_argument("case D needs a truncated_vertical problem");
      const double r2 = q.R2_free();
      const bool feasible = q.xT >= tv->x_min || near(q.xT, tv->x_min);
      const bool active = near(q.xT, tv->x_min) || q.xT < tv->x_min;
      const double multiplier = active ? r2 : 0.0;
      rep.R2 = r2;
      rep.constraint_active = active;
      rep.complementarity = active ? (q.xT - tv->x_min) * multiplier : 0.0;
      const bool sign = p.sense() == Sense::min ? multiplier >= 0.0 : multiplier <= 0.0;
      rep.kkt_sign_ok = feasible && sign;
      break;
    }
    case CaseTag::E: {
      const auto* th = std::get_if<TruncatedHorizontal>(&p.terminal());
      if (!th) throw std::invalid_argument("case E needs a truncated_horizontal problem");
      const double r1 = q.R1_free();
      const bool feasible = T <= th->T_max || near(T, th->T_max);
      const bool active = near(T, th->T_max) || T > th->T_max;
      const double multiplier = active ? r1 : 0.0;
      rep.R1 = r1;
      rep.constraint_active = active;
      rep.complementarity = active ? (T - th->T_max) * multiplier : 0.0;
      const bool sign = p.sense() == Sense::min ? multiplier <= 0.0 : multiplier >= 0.0;
      rep.kkt_sign_ok = feasible && sign;
      break;
    }
    case CaseTag::InfiniteHorizon:
      break;
  }
  return rep;
}

TransversalityReport transversality(const VariationalProblem& p, const SampledTrajectory& x, double T) {
  return transversality_as(natural_case(p), p, x, T);
}

TailReport tail_diagnostic(const VariationalProblem& p,
                           const std::vector<std::pair<SampledTrajectory, double>>& solutions) {
  if (solutions.size() < 3) throw std::invalid_argument("tail diagnostic needs at least 3 truncations");
  TailReport tail;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const auto& [x, T] = solutions[i];
    if (i > 0 && !(T > solutions[i - 1].second)) {
      throw std::invalid_argument("tail diagnostic: truncation times must increase");
    }
    check_candidate(p, x, T);
    const NodeSamples s = sample_partials(p, x, T);
    const double bracket = terminal_bracket(SampledFunction(x.grid(), s.L_dx), x.order());
    tail.schedule.push_back(T);
    tail.s_values.push_back(bracket * x.terminal_value());
  }
  const std::size_t n = tail.s_values.size();
  const double s0 = std::fabs(tail.s_values[n - 3]);
  const double s1 = std::fabs(tail.s_values[n - 2]);
  const double s2 = std::fabs(tail.s_values[n - 1]);
  tail.trend_decreasing = s1 <= s0 && s2 <= s1;
  return tail;
}

}  // namespace fracvar
