#include "fracvar/discretize.hpp"

#include <cmath>
#include <string>

#include "fracvar/parallel.hpp"

namespace fracvar {

SampledTrajectory::SampledTrajectory(UniformGrid grid, std::vector<double> values, FractionalOrder order,
                                     unsigned threads)
    : grid_(grid), values_(std::move(values)), caputo_(grid.size()), order_(order) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("trajectory: value count does not match grid");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("trajectory: non-finite value at node " + std::to_string(i));
    }
  }
  CaputoL1(grid_.step(), order_, grid_.size()).apply(values_, caputo_, threads);
}

SampledTrajectory SampledTrajectory::rescaled(double new_T, unsigned threads) const {
  return SampledTrajectory(grid_.rescaled(new_T), values_, order_, threads);
}

EvaluationError::EvaluationError(std::size_t node, std::string env, const std::string& cause)
    : std::runtime_error("integrand failed at node " + std::to_string(node) + " with " + env + ": " + cause),
      node_(node),
      env_(std::move(env)) {}

Env lagrangian_env(const VariationalProblem& p, double t, double x, double dx, double T) {
  Env env;
  env.set(Variable::t, t).set(Variable::x, x).set(Variable::dx, dx);
  if (p.curve_constrained()) env.set(Variable::phiT, p.curve(T));
  return env;
}

namespace {

void check_span(const VariationalProblem& p, const SampledTrajectory& x, double T) {
  const double scale = std::max(1.0, std::fabs(T));
  if (x.grid().a() != p.a() || std::fabs(x.grid().b() - T) > 1e-12 * scale) {
    throw std::invalid_argument("trajectory grid does not span [a, T]");
  }
  if (!(T > p.a())) throw std::invalid_argument("terminal time must exceed a");
  if (!std::holds_alternative<InfiniteHorizon>(p.terminal()) && T > p.b() * (1.0 + 1e-12) + 1e-12) {
    throw std::invalid_argument("terminal time exceeds the search ceiling b");
  }
  if (x.values()[0] != p.x_a()) throw std::invalid_argument("trajectory does not start at x_a");
}

double integrand_at(const VariationalProblem& p, std::size_t k, double t, double x, double dx, double phiT) {
  Env env;
  env.set(Variable::t, t).set(Variable::x, x).set(Variable::dx, dx);
  if (p.curve_constrained()) env.set(Variable::phiT, phiT);
  try {
    return p.L(env);
  } catch (const ExprError& e) {
    throw EvaluationError(k, env.str(), e.what());
  }
}

double curve_value(const VariationalProblem& p, double T) { return p.curve_constrained() ? p.curve(T) : 0.0; }

double terminal_cost(const VariationalProblem& p, double T, double xT) {
  try {
    return p.phi(T, xT);
  } catch (const ExprError& e) {
    throw std::runtime_error(std::string("terminal cost failed: ") + e.what());
  }
}

// Objective for given node values on [a, T] without range checks.
//
// Interval k = (t_{k-1}, t_k] carries the L1 value D_k as its derivative, so
// each interval is integrated by the trapezoid rule in (t, x) with D_k held
// fixed. Node samples L(t_k, x_k, D_k) go to *samples.
double objective(const VariationalProblem& p, const UniformGrid& grid, std::span<const double> values,
                 std::span<const double> caputo, double T, std::vector<double>* samples) {
  const double phiT = curve_value(p, T);
  const std::size_t n = values.size();
  const double h = grid.step();
  double sum = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    sum += integrand_at(p, k - 1, grid.node(k - 1), values[k - 1], caputo[k], phiT) +
           integrand_at(p, k, grid.node(k), values[k], caputo[k], phiT);
  }
  if (samples) {
    samples->resize(n);
    for (std::size_t k = 0; k < n; ++k) (*samples)[k] = integrand_at(p, k, grid.node(k), values[k], caputo[k], phiT);
  }
  return 0.5 * h * sum + terminal_cost(p, T, values.back());
}

bool endpoint_on_curve(const VariationalProblem& p) {
  return std::holds_alternative<TerminalCurve>(p.terminal()) || std::holds_alternative<CurveConstrained>(p.terminal());
}

}  // namespace

ObjectiveValue evaluate_functional(const VariationalProblem& p, const SampledTrajectory& x, double T) {
  check_span(p, x, T);
  ObjectiveValue out;
  out.j = objective(p, x.grid(), x.values(), x.caputo(), T, &out.integrand_samples);
  if (!std::isfinite(out.j)) throw std::runtime_error("objective is not finite");
  return out;
}

Gradient gradient(const VariationalProblem& p, const SampledTrajectory& x, double T, unsigned threads) {
  check_span(p, x, T);
  const std::size_t n = x.size();
  const UniformGrid& grid = x.grid();
  const double h = grid.step();
  const double phiT = curve_value(p, T);
  const auto values = x.values();
  const auto caputo = x.caputo();
  const CaputoL1 scheme(h, x.order(), n);

  // The L1 derivative is linear in x, so a step in node m moves D_k by
  // eps * column(k - m) for k >= m and leaves earlier intervals alone. Only
  // the affected interval terms are differenced.
  Gradient g;
  g.nodes.assign(n, 0.0);
  parallel_for(1, n, threads, [&](std::size_t m) {
    const double eps = 1e-6 * std::max(1.0, std::fabs(values[m]));
    double diff = 0.0;
    for (std::size_t k = m; k < n; ++k) {
      const double shift = eps * scheme.column(k - m);
      const double xl = values[k - 1];
      const double xr = values[k];
      const double dl = k - 1 == m ? eps : 0.0;
      const double dr = k == m ? eps : 0.0;
      const double tl = grid.node(k - 1);
      const double tr = grid.node(k);
      const double up = integrand_at(p, k - 1, tl, xl + dl, caputo[k] + shift, phiT) +
                        integrand_at(p, k, tr, xr + dr, caputo[k] + shift, phiT);
      const double down = integrand_at(p, k - 1, tl, xl - dl, caputo[k] - shift, phiT) +
                          integrand_at(p, k, tr, xr - dr, caputo[k] - shift, phiT);
      diff += 0.5 * h * (up - down);
    }
    if (m + 1 == n) diff += terminal_cost(p, T, values[m] + eps) - terminal_cost(p, T, values[m] - eps);
    g.nodes[m] = diff / (2.0 * eps);
  });

  const double dT = 1e-5 * (T - p.a());
  auto shifted = [&](double T_probe) {
    std::vector<double> v(values.begin(), values.end());
    if (endpoint_on_curve(p)) v.back() = p.curve(T_probe);
    const UniformGrid gp = grid.rescaled(T_probe);
    std::vector<double> d(n);
    CaputoL1(gp.step(), x.order(), n).apply(v, d);
    return objective(p, gp, v, d, T_probe, nullptr);
  };
  g.dJ_dT = (shifted(T + dT) - shifted(T - dT)) / (2.0 * dT);
  return g;
}

}  // namespace fracvar
