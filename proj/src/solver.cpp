#include "fracvar/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fracvar/parallel.hpp"

namespace fracvar {

void SolverOptions::validate() const {
  if (n_nodes < 11) throw std::invalid_argument("solver.n_nodes must be at least 11");
  if (!(grad_tol > 0.0) || !(T_tol > 0.0)) throw std::invalid_argument("solver tolerances must be positive");
  if (max_outer_iters < 1 || max_inner_iters < 1) throw std::invalid_argument("solver iteration caps must be positive");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long long parse_integer(const std::string& key, const std::string& text, int line) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ProblemError(key, line, "expected an integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ProblemError(key, line, "expected a finite number, got '" + text + "'");
  }
  return v;
}

void apply_option(SolverOptions& o, const std::string& name, const std::string& value, int line) {
  const std::string key = "solver." + name;
  if (name == "n_nodes") {
    const long long v = parse_integer(key, value, line);
    if (v < 11) throw ProblemError(key, line, "must be at least 11");
    o.n_nodes = static_cast<std::size_t>(v);
  } else if (name == "max_outer_iters" || name == "max_inner_iters") {
    const long long v = parse_integer(key, value, line);
    if (v < 1 || v > 1000000) throw ProblemError(key, line, "must be in [1, 1000000]");
    (name == "max_outer_iters" ? o.max_outer_iters : o.max_inner_iters) = static_cast<int>(v);
  } else if (name == "grad_tol" || name == "T_tol") {
    const double v = parse_real(key, value, line);
    if (!(v > 0.0)) throw ProblemError(key, line, "must be positive");
    (name == "grad_tol" ? o.grad_tol : o.T_tol) = v;
  } else if (name == "perturbation_seed") {
    const long long v = parse_integer(key, value, line);
    if (v < 0) throw ProblemError(key, line, "must be non-negative");
    o.perturbation_seed = static_cast<std::uint64_t>(v);
  } else if (name == "threads") {
    const long long v = parse_integer(key, value, line);
    if (v < 0 || v > 1024) throw ProblemError(key, line, "must be in [0, 1024]");
    o.threads = static_cast<unsigned>(v);
  } else {
    throw ProblemError(key, line, "unknown solver option");
  }
}

}  // namespace

SolverOptions solver_options_from(const ProblemConfig& config, const std::map<std::string, std::string>& overrides) {
  SolverOptions o;
  for (const auto& [key, entry] : config.entries) {
    if (key.rfind("solver.", 0) != 0) continue;
    apply_option(o, key.substr(7), entry.value, entry.line);
  }
  for (const auto& [key, value] : overrides) {
    const std::string name = key.rfind("solver.", 0) == 0 ? key.substr(7) : key;
    apply_option(o, name, value, 0);
  }
  return o;
}

// ---------------------------------------------------------------------------
// Inner solve

namespace {

// The discretized objective as a function of the free node values.
class NodeObjective {
 public:
  NodeObjective(const VariationalProblem& p, double T, std::size_t n, std::optional<double> pinned, unsigned threads)
      : p_(p), T_(T), grid_(p.a(), T, n), pinned_(pinned), threads_(threads) {}

  std::size_t dim() const { return pinned_ ? grid_.size() - 2 : grid_.size() - 1; }

  std::vector<double> full(const std::vector<double>& z) const {
    std::vector<double> v(grid_.size());
    v[0] = p_.x_a();
    std::copy(z.begin(), z.end(), v.begin() + 1);
    if (pinned_) v.back() = *pinned_;
    return v;
  }

  SampledTrajectory trajectory(const std::vector<double>& z) const {
    return SampledTrajectory(grid_, full(z), p_.order());
  }

  /// sign * J, or +inf where the integrand cannot be evaluated.
  double value(const std::vector<double>& z) const {
    try {
      return p_.sign() * evaluate_functional(p_, trajectory(z), T_).j;
    } catch (const std::runtime_error&) {
      return kInf;
    } catch (const std::invalid_argument&) {
      return kInf;
    }
  }

  /// sign-adjusted node gradient; dJ_dT is returned raw.
  bool gradient(const std::vector<double>& z, std::vector<double>& g, double* dJ_dT = nullptr) const {
    try {
      const Gradient full_g = fracvar::gradient(p_, trajectory(z), T_, threads_);
      g.assign(full_g.nodes.begin() + 1, full_g.nodes.begin() + 1 + static_cast<std::ptrdiff_t>(dim()));
      for (double& v : g) v *= p_.sign();
      if (dJ_dT) *dJ_dT = full_g.dJ_dT;
      return std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); });
    } catch (const std::runtime_error&) {
      return false;
    } catch (const std::invalid_argument&) {
      return false;
    }
  }

 private:
  const VariationalProblem& p_;
  double T_;
  UniformGrid grid_;
  std::optional<double> pinned_;
  unsigned threads_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

struct LinePoint {
  double alpha = 0.0;
  double f = kInf;
  std::vector<double> z;
  std::vector<double> g;
};

// Strong Wolfe line search (bracketing phase plus zoom).
std::optional<LinePoint> wolfe_search(const NodeObjective& obj, const std::vector<double>& z, double f0,
                                      const std::vector<double>& d, double dphi0, double alpha_init) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  auto at = [&](double alpha) {
    LinePoint pt;
    pt.alpha = alpha;
    pt.z = z;
    for (std::size_t i = 0; i < z.size(); ++i) pt.z[i] += alpha * d[i];
    pt.f = obj.value(pt.z);
    return pt;
  };
  auto slope = [&](LinePoint& pt) {
    if (!obj.gradient(pt.z, pt.g)) return kInf;
    return dot(pt.g, d);
  };

  auto zoom = [&](LinePoint lo, double dphi_lo, LinePoint hi) -> std::optional<LinePoint> {
    for (int it = 0; it < 40; ++it) {
      const double width = hi.alpha - lo.alpha;
      double trial = lo.alpha + 0.5 * width;
      if (std::isfinite(hi.f)) {
        const double denom = 2.0 * (hi.f - lo.f - dphi_lo * width);
        if (denom > 0.0) {
          const double q = lo.alpha - dphi_lo * width * width / denom;
          const double lo_b = std::min(lo.alpha, hi.alpha) + 0.1 * std::fabs(width);
          const double hi_b = std::max(lo.alpha, hi.alpha) - 0.1 * std::fabs(width);
          if (std::isfinite(q)) trial = std::clamp(q, lo_b, hi_b);
        }
      }
      LinePoint pt = at(trial);
      if (pt.f > f0 + c1 * trial * dphi0 || pt.f >= lo.f) {
        hi = std::move(pt);
        continue;
      }
      const double dphi = slope(pt);
      if (!std::isfinite(dphi)) {
        hi = std::move(pt);
        continue;
      }
      if (std::fabs(dphi) <= -c2 * dphi0) return pt;
      if (dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(pt);
      dphi_lo = dphi;
      if (std::fabs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::fabs(lo.alpha))) break;
    }
    // Sufficient decrease without the curvature condition is still progress.
    if (lo.alpha > 0.0 && lo.f < f0) {
      if (lo.g.empty() && !std::isfinite(slope(lo))) return std::nullopt;
      return lo;
    }
    return std::nullopt;
  };

  LinePoint prev;
  prev.alpha = 0.0;
  prev.f = f0;
  prev.z = z;
  double dphi_prev = dphi0;
  double alpha = alpha_init;
  for (int it = 0; it < 60; ++it) {
    LinePoint pt = at(alpha);
    if (!std::isfinite(pt.f) || pt.f > f0 + c1 * alpha * dphi0 || (it > 0 && pt.f >= prev.f)) {
      return zoom(std::move(prev), dphi_prev, std::move(pt));
    }
    const double dphi = slope(pt);
    if (!std::isfinite(dphi)) return zoom(std::move(prev), dphi_prev, std::move(pt));
    if (std::fabs(dphi) <= -c2 * dphi0) return pt;
    if (dphi >= 0.0) return zoom(std::move(pt), dphi, std::move(prev));
    prev = std::move(pt);
    dphi_prev = dphi;
    alpha *= 2.0;
  }
  return std::nullopt;
}

std::uint64_t mix_seed(std::uint64_t seed, double T) {
  std::uint64_t z = seed ^ std::bit_cast<std::uint64_t>(T);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

InnerResult solve_fixed_T(const VariationalProblem& p, double T, const SolverOptions& opts,
                          std::optional<double> pinned_end) {
  opts.validate();
  if (!(T > p.a())) throw std::invalid_argument("solve_fixed_T: T must exceed a");
  if (!std::holds_alternative<InfiniteHorizon>(p.terminal()) && T > p.b()) {
    throw std::invalid_argument("solve_fixed_T: T exceeds b");
  }
  const NodeObjective obj(p, T, opts.n_nodes, pinned_end, opts.threads);
  const std::size_t m = obj.dim();
  const UniformGrid grid(p.a(), T, opts.n_nodes);

  std::vector<double> z(m);
  const double end = pinned_end.value_or(p.x_a());
  for (std::size_t i = 0; i < m; ++i) {
    const double s = (grid.node(i + 1) - p.a()) / (T - p.a());
    z[i] = p.x_a() + s * (end - p.x_a());
  }

  std::mt19937_64 rng(mix_seed(opts.perturbation_seed, T));
  std::normal_distribution<double> normal(0.0, 1.0);

  InnerResult out{obj.trajectory(z), T, 0.0, kInf, 0.0, 0, 0, false};
  double f = obj.value(z);
  std::vector<double> g;
  if (!std::isfinite(f) || !obj.gradient(z, g)) {
    throw std::runtime_error("objective cannot be evaluated at the initial guess");
  }

  std::vector<double> H(m * m, 0.0);
  auto reset_H = [&](double scale) {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) H[i * m + i] = scale;
  };
  reset_H(1.0);
  bool fresh = true;

  std::vector<double> d(m), Hy(m);
  int it = 0;
  for (; it < opts.max_inner_iters; ++it) {
    // Aim below grad_tol so the envelope dJ/dT is not dominated by the
    // inner residual.
    if (sup_norm(g) <= 0.1 * opts.grad_tol) break;
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s -= H[i * m + j] * g[j];
      d[i] = s;
    }
    double dphi0 = dot(g, d);
    if (!(dphi0 < 0.0)) {
      reset_H(1.0);
      fresh = true;
      for (std::size_t i = 0; i < m; ++i) d[i] = -g[i];
      dphi0 = dot(g, d);
    }
    const double alpha_init = fresh ? 0.1 * std::max(1.0, sup_norm(z)) / sup_norm(d) : 1.0;
    auto step = wolfe_search(obj, z, f, d, dphi0, alpha_init);
    if (!step) {
      if (out.restarts >= 3) break;
      ++out.restarts;
      const double scale = 1e-6 * std::max(1.0, sup_norm(z));
      std::vector<double> trial = z;
      for (double& v : trial) v += scale * normal(rng);
      std::vector<double> gt;
      const double ft = obj.value(trial);
      if (std::isfinite(ft) && obj.gradient(trial, gt)) {
        z = std::move(trial);
        f = ft;
        g = std::move(gt);
      }
      reset_H(1.0);
      fresh = true;
      continue;
    }
    std::vector<double> s(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = step->z[i] - z[i];
      y[i] = step->g[i] - g[i];
    }
    const double ys = dot(y, s);
    if (ys > 1e-14 * std::sqrt(dot(y, y) * dot(s, s))) {
      if (fresh) reset_H(ys / dot(y, y));
      fresh = false;
      const double rho = 1.0 / ys;
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += H[i * m + j] * y[j];
        Hy[i] = acc;
      }
      const double yHy = dot(y, Hy);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          H[i * m + j] += -rho * (Hy[i] * s[j] + s[i] * Hy[j]) + (rho * rho * yHy + rho) * s[i] * s[j];
        }
      }
    }
    z = std::move(step->z);
    f = step->f;
    g = std::move(step->g);
  }

  double dJ_dT = 0.0;
  obj.gradient(z, g, &dJ_dT);
  out.trajectory = obj.trajectory(z);
  out.objective = p.sign() * f;
  out.grad_norm = sup_norm(g);
  out.dJ_dT = dJ_dT;
  out.iterations = it;
  out.converged = out.grad_norm <= opts.grad_tol;
  return out;
}

namespace {

// Endpoint value implied by the terminal condition at T, if pinned.
std::optional<double> endpoint_rule(const VariationalProblem& p, double T) {
  return std::visit(
      [&](const auto& tc) -> std::optional<double> {
        using K = std::decay_t<decltype(tc)>;
        if constexpr (std::is_same_v<K, HorizontalLine> || std::is_same_v<K, TruncatedHorizontal>) {
          return tc.xT_fixed;
        } else if constexpr (std::is_same_v<K, TerminalCurve> || std::is_same_v<K, CurveConstrained>) {
          return p.curve(T);
        } else {
          return std::nullopt;
        }
      },
      p.terminal());
}

}  // namespace

InnerResult solve_fixed_T(const VariationalProblem& p, double T, const SolverOptions& opts) {
  return solve_fixed_T(p, T, opts, endpoint_rule(p, T));
}

// ---------------------------------------------------------------------------
// Outer search

namespace {

struct Probe {
  double T = 0.0;
  double F = kInf;  // sense-adjusted objective
  std::optional<InnerResult> inner;
};

Probe run_probe(const VariationalProblem& p, double T, const SolverOptions& opts) {
  Probe pr;
  pr.T = T;
  try {
    InnerResult r = solve_fixed_T(p, T, opts);
    pr.F = p.sign() * r.objective;
    if (!std::isfinite(pr.F)) pr.F = kInf;
    pr.inner = std::move(r);
  } catch (const std::runtime_error&) {
    pr.F = kInf;
  }
  return pr;
}

TraceEntry trace_of(const std::string& phase, const Probe& pr, double best_F, double sign) {
  TraceEntry e;
  e.phase = phase;
  e.T = pr.T;
  if (pr.inner) {
    e.J = pr.inner->objective;
    e.grad_norm = pr.inner->grad_norm;
    e.dJ_dT = pr.inner->dJ_dT;
    e.inner_converged = pr.inner->converged;
  } else {
    e.J = std::numeric_limits<double>::quiet_NaN();
    e.grad_norm = std::numeric_limits<double>::quiet_NaN();
    e.dJ_dT = std::numeric_limits<double>::quiet_NaN();
  }
  e.best_J = sign * best_F;
  return e;
}

struct SearchResult {
  Probe best;
  std::vector<TraceEntry> trace;
  std::vector<std::string> notes;
  bool free_T_ok = true;
};

constexpr int kScanPoints = 16;

SearchResult free_T_search(const VariationalProblem& p, const SolverOptions& opts) {
  SearchResult res;
  const double a = p.a();
  const double b = p.b();
  const double sign = p.sign();

  // Presampling scan; probes run independently and are merged in T order.
  std::vector<Probe> scan(kScanPoints);
  SolverOptions probe_opts = opts;
  probe_opts.threads = 0;
  parallel_for(0, kScanPoints, opts.threads, [&](std::size_t i) {
    const double T = i + 1 == kScanPoints ? b : a + (b - a) * static_cast<double>(i + 1) / kScanPoints;
    scan[i] = run_probe(p, T, probe_opts);
  });

  std::size_t m = 0;
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (scan[i].F < scan[m].F) m = i;
  }
  if (!std::isfinite(scan[m].F)) throw std::runtime_error("objective is not finite at any scanned terminal time");
  Probe best = scan[m];
  for (const Probe& pr : scan) {
    res.trace.push_back(trace_of("scan", pr, best.F, sign));
  }

  bool unimodal = true;
  for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
    const double slack = 1e-10 * std::max(1.0, std::fabs(scan[m].F));
    if (i < m && scan[i + 1].F > scan[i].F + slack) unimodal = false;
    if (i >= m && scan[i + 1].F < scan[i].F - slack) unimodal = false;
  }
  if (!unimodal) {
    res.best = best;
    res.free_T_ok = false;
    res.notes.push_back("objective is not unimodal in T over the presampling scan");
    return res;
  }

  double lo = m == 0 ? a : scan[m - 1].T;
  double hi = m + 1 == scan.size() ? b : scan[m + 1].T;
  const double bracket_lo = lo;
  const double bracket_hi = hi;

  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<Probe> visited;
  auto probe = [&](double T, const char* phase) {
    Probe pr = run_probe(p, T, opts);
    if (pr.F < best.F) best = pr;
    res.trace.push_back(trace_of(phase, pr, best.F, sign));
    visited.push_back(pr);
    return pr.F;
  };

  double c = hi - phi * (hi - lo);
  double d = lo + phi * (hi - lo);
  double Fc = probe(c, "golden");
  double Fd = probe(d, "golden");
  int iters = 0;
  while (hi - lo > opts.T_tol && iters < opts.max_outer_iters) {
    if (Fc <= Fd) {
      hi = d;
      d = c;
      Fd = Fc;
      c = hi - phi * (hi - lo);
      Fc = probe(c, "golden");
    } else {
      lo = c;
      c = d;
      Fc = Fd;
      d = lo + phi * (hi - lo);
      Fd = probe(d, "golden");
    }
    ++iters;
  }
  if (hi - lo > opts.T_tol) res.notes.push_back("golden-section search hit max_outer_iters");

  // Secant polish on dJ/dT from the two best distinct points.
  if (best.inner && std::fabs(best.inner->dJ_dT) > opts.grad_tol) {
    const Probe* other = nullptr;
    for (const Probe& v : visited) {
      if (v.T == best.T || !v.inner) continue;
      if (!other || std::fabs(v.T - best.T) < std::fabs(other->T - best.T)) other = &v;
    }
    if (other) {
      double T0 = best.T, g0 = best.inner->dJ_dT;
      double T1 = other->T, g1 = other->inner->dJ_dT;
      for (int k = 0; k < 30 && std::fabs(best.inner->dJ_dT) > opts.grad_tol; ++k) {
        if (g0 == g1) break;
        double Tn = T0 - g0 * (T0 - T1) / (g0 - g1);
        if (!std::isfinite(Tn)) break;
        Tn = std::clamp(Tn, bracket_lo + 1e-3 * (bracket_hi - bracket_lo), bracket_hi);
        if (std::fabs(Tn - T0) <= 1e-15 * std::max(1.0, std::fabs(T0))) break;
        Probe pr = run_probe(p, Tn, opts);
        if (!pr.inner) break;
        const double tie = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(best.F));
        if (pr.F <= best.F || (std::fabs(pr.inner->dJ_dT) < std::fabs(best.inner->dJ_dT) && pr.F <= best.F + tie)) {
          best = pr;
        }
        res.trace.push_back(trace_of("polish", pr, best.F, sign));
        T1 = T0;
        g1 = g0;
        T0 = Tn;
        g0 = pr.inner->dJ_dT;
      }
    }
  }

  if (best.T >= b - opts.T_tol) {
    res.free_T_ok = false;
    res.notes.push_back("T* reached the search ceiling b");
  }
  res.best = std::move(best);
  return res;
}

SolverReport finish(const VariationalProblem& p, const SolverOptions& opts, InnerResult inner,
                    std::vector<TraceEntry> trace, std::vector<std::string> notes, bool free_T) {
  const double T = inner.T;
  SolverReport rep{inner.trajectory, T, inner.objective, transversality(p, inner.trajectory, T), false,
                   std::move(trace), std::nullopt, 0.0, 0.0, inner.grad_norm, inner.dJ_dT, std::move(notes)};
  bool ok = inner.converged;
  if (!inner.converged) rep.notes.push_back("inner solve did not reach grad_tol");
  if (free_T && std::fabs(inner.dJ_dT) > opts.grad_tol) {
    ok = false;
    rep.notes.push_back("|dJ/dT| above grad_tol");
  }
  try {
    rep.el_interior_sup = el_residual(p, inner.trajectory, T).interior_sup;
    rep.el_error_estimate = el_error_estimate(p, inner.trajectory, T);
  } catch (const std::runtime_error& e) {
    ok = false;
    rep.el_interior_sup = std::numeric_limits<double>::quiet_NaN();
    rep.notes.push_back(std::string("EL residual failed: ") + e.what());
  }
  if (!(rep.el_interior_sup <= 10.0 * rep.el_error_estimate + 1e-10)) {
    ok = false;
    rep.notes.push_back("EL residual above 10x the grid error estimate");
  }
  rep.converged = ok && rep.notes.empty();
  return rep;
}

void attach_kkt(SolverReport& rep) {
  const TransversalityReport& r = rep.residuals;
  KktRecord k;
  if (r.case_tag == CaseTag::D) {
    k.constraint = "x(T) >= x_min";
    k.multiplier = r.constraint_active.value_or(false) ? r.R2.value_or(0.0) : 0.0;
  } else {
    k.constraint = "T <= T_max";
    k.multiplier = r.constraint_active.value_or(false) ? r.R1.value_or(0.0) : 0.0;
  }
  k.active = r.constraint_active.value_or(false);
  k.complementarity = r.complementarity.value_or(0.0);
  k.sign_ok = r.kkt_sign_ok.value_or(false);
  if (!k.sign_ok) {
    rep.converged = false;
    rep.notes.push_back("KKT sign condition fails");
  }
  rep.kkt = k;
}

TraceEntry fixed_entry(const std::string& phase, const InnerResult& r, double sign) {
  Probe pr;
  pr.T = r.T;
  pr.F = sign * r.objective;
  pr.inner = r;
  return trace_of(phase, pr, pr.F, sign);
}

}  // namespace

SolverReport solve(const VariationalProblem& p, const SolverOptions& opts) {
  opts.validate();
  const double sign = p.sign();
  const TerminalCondition& tc = p.terminal();

  if (const auto* v = std::get_if<VerticalLine>(&tc)) {
    InnerResult r = solve_fixed_T(p, v->T_fixed, opts);
    std::vector<TraceEntry> trace{fixed_entry("fixed", r, sign)};
    return finish(p, opts, std::move(r), std::move(trace), {}, false);
  }

  if (const auto* v = std::get_if<TruncatedVertical>(&tc)) {
    InnerResult r = solve_fixed_T(p, v->T_fixed, opts, std::nullopt);
    std::vector<TraceEntry> trace{fixed_entry("fixed", r, sign)};
    if (r.trajectory.terminal_value() < v->x_min) {
      r = solve_fixed_T(p, v->T_fixed, opts, v->x_min);
      trace.push_back(fixed_entry("pin", r, sign));
    }
    SolverReport rep = finish(p, opts, std::move(r), std::move(trace), {}, false);
    attach_kkt(rep);
    return rep;
  }

  if (const auto* ih = std::get_if<InfiniteHorizon>(&tc)) {
    std::vector<std::pair<SampledTrajectory, double>> solutions;
    std::vector<TraceEntry> trace;
    std::vector<std::string> notes;
    std::optional<InnerResult> last;
    for (double T : ih->schedule) {
      InnerResult r = solve_fixed_T(p, T, opts, std::nullopt);
      trace.push_back(fixed_entry("schedule", r, sign));
      if (!r.converged) notes.push_back("inner solve did not reach grad_tol at T' = " + std::to_string(T));
      solutions.emplace_back(r.trajectory, T);
      last = std::move(r);
    }
    SolverReport rep = finish(p, opts, std::move(*last), std::move(trace), std::move(notes), false);
    rep.residuals.tail = tail_diagnostic(p, solutions);
    return rep;
  }

  SearchResult s = free_T_search(p, opts);
  if (!s.best.inner) throw std::runtime_error("no admissible terminal time found");

  if (const auto* th = std::get_if<TruncatedHorizontal>(&tc)) {
    if (s.best.T > th->T_max) {
      InnerResult r = solve_fixed_T(p, th->T_max, opts, th->xT_fixed);
      s.trace.push_back(fixed_entry("pin", r, sign));
      SolverReport rep = finish(p, opts, std::move(r), std::move(s.trace), {}, false);
      attach_kkt(rep);
      return rep;
    }
    SolverReport rep = finish(p, opts, std::move(*s.best.inner), std::move(s.trace), std::move(s.notes), true);
    if (!s.free_T_ok) rep.converged = false;
    attach_kkt(rep);
    return rep;
  }

  SolverReport rep = finish(p, opts, std::move(*s.best.inner), std::move(s.trace), std::move(s.notes), true);
  if (!s.free_T_ok) rep.converged = false;
  return rep;
}

}  // namespace fracvar
