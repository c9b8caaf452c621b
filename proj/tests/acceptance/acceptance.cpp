// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fracvar/discretize.hpp"
#include "fracvar/expr.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/problem.hpp"
#include "fracvar/report.hpp"
#include "fracvar/residuals.hpp"
#include "fracvar/solver.hpp"
#include "support/expr_corpus.hpp"
#include "support/oracles.hpp"

using namespace fracvar;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

VariationalProblem from_text(const std::string& text) { return build_problem(ProblemConfig::parse(text)); }

SampledFunction sample(double a, double b, std::size_t n, const std::function<double(double)>& f) {
  return SampledFunction::from(UniformGrid(a, b, n), f);
}

template <typename F>
SampledTrajectory trajectory(const VariationalProblem& p, double T, std::size_t n, F&& f) {
  const UniformGrid g(p.a(), T, n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(g.node(i));
  return SampledTrajectory(g, std::move(v), p.order());
}

double sup_abs(std::span<const double> v, double c = 0.0) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x - c));
  return m;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// 1 and 2 keep their dumped reports for criterion 10.

std::string unit_time_text(double alpha, double x_a) {
  return "alpha = " + std::to_string(alpha) + "\na = 0\nb = 10\nx_a = " + std::to_string(x_a) +
         "\nlagrangian = t^2 - 1 + dx^2\nterminal.kind = free_both\n";
}

const char* kCurveText =
    "alpha = 0.999\na = 0\nb = 10\nx_a = 1\nlagrangian = dx^2 + phiT^2\n"
    "terminal.kind = curve_constrained\nterminal.phi = t\n";

std::string solve_dump(const VariationalProblem& p, const SolverOptions& o) { return dump(to_json(p, o, solve(p, o))); }

SolverReport solve_keep(const VariationalProblem& p, const SolverOptions& o, std::vector<std::string>& dumps) {
  SolverReport rep = solve(p, o);
  dumps.push_back(dump(to_json(p, o, rep)));
  return rep;
}

Outcome criterion1(std::vector<std::string>& dumps) {
  Outcome r;
  SolverOptions o;
  o.n_nodes = 101;
  for (double alpha : {0.3, 0.5, 0.8}) {
    for (double x_a : {0.0, 2.0}) {
      const std::string tag = "alpha=" + num(alpha) + " x_a=" + num(x_a);
      const auto p = from_text(unit_time_text(alpha, x_a));
      const auto t0 = Clock::now();
      const SolverReport rep = solve_keep(p, o, dumps);
      const double secs = seconds_since(t0);
      r.require(std::fabs(rep.T_star - 1.0) < 0.02, tag + " T*=" + num(rep.T_star));
      r.require(sup_abs(rep.trajectory.values(), x_a) < 1e-4, tag + " deviation");
      r.require(secs < 30.0, tag + " runtime " + num(secs) + "s");

      const auto x = trajectory(p, 1.0, 101, [&](double) { return x_a; });
      const auto tr = transversality(p, x, 1.0);
      const auto el = el_residual(p, x, 1.0);
      r.require(std::fabs(*tr.R1) < 1e-6, tag + " R1=" + num(*tr.R1));
      r.require(std::fabs(*tr.R2) < 1e-8, tag + " R2=" + num(*tr.R2));
      r.require(el.interior_sup < 1e-8, tag + " EL=" + num(el.interior_sup));
    }
  }
  return r;
}

Outcome criterion2(std::vector<std::string>& dumps) {
  Outcome r;
  const auto p = from_text(kCurveText);
  SolverOptions o;
  o.n_nodes = 101;
  const auto t0 = Clock::now();
  const SolverReport rep = solve_keep(p, o, dumps);
  const double secs = seconds_since(t0);
  const double T_ref = std::sqrt(-6.0 + 6.0 * std::sqrt(13.0)) / 6.0;
  r.require(std::fabs(T_ref - 0.658983) < 1e-6, "closed-form T");
  r.require(std::fabs(rep.T_star - 0.658983) < 0.05, "T*=" + num(rep.T_star));
  double dev = 0.0;
  for (std::size_t i = 0; i < rep.trajectory.size(); ++i) {
    const double t = rep.trajectory.grid().node(i);
    dev = std::max(dev, std::fabs(rep.trajectory.values()[i] - (1.0 - 0.517490 * t)));
  }
  r.require(dev < 0.05, "deviation " + num(dev));
  const double xp = rep.residuals.xprime_T;
  const double T = rep.T_star;
  const double classical = 2 * (1 - xp) * xp + 3 * T * T + xp * xp;
  r.require(std::fabs(classical) < 0.05, "classical transversality " + num(classical));
  r.require(secs < 120.0, "runtime " + num(secs) + "s");
  return r;
}

// ---------------------------------------------------------------------------

struct TestFunction {
  const char* name;
  std::function<double(double)> f, df;
};

Outcome criterion3() {
  Outcome r;
  const auto t0 = Clock::now();
  const std::vector<TestFunction> fns = {
      {"t", [](double t) { return t; }, [](double) { return 1.0; }},
      {"t^2", [](double t) { return t * t; }, [](double t) { return 2 * t; }},
      {"sin", [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); }},
      {"exp", [](double t) { return std::exp(t); }, [](double t) { return std::exp(t); }},
      {"(t+1)^1.5", [](double t) { return std::pow(t + 1, 1.5); }, [](double t) { return 1.5 * std::sqrt(t + 1); }},
  };
  const double a = 0.0, b = 1.0;
  const std::size_t n = 1025;
  for (const auto& fn : fns) {
    const SampledFunction s = sample(a, b, n, fn.f);
    for (double alpha : {0.25, 0.5, 0.75}) {
      const std::string tag = std::string(fn.name) + " alpha=" + num(alpha);
      const FractionalOrder ord(alpha);
      const auto caputo = left_caputo(s, ord);
      const auto integral = left_rl_integral(s, alpha);
      const auto right = right_rl_derivative(s, ord);
      double e_c = 0, m_c = 0, e_i = 0, m_i = 0, e_r = 0, m_r = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double x = s.grid().node(k);
        const double rc = oracle::left_caputo(fn.df, alpha, a, x);
        const double ri = oracle::left_rl_integral(fn.f, alpha, a, x);
        e_c = std::max(e_c, std::fabs(caputo[k] - rc));
        m_c = std::max(m_c, std::fabs(rc));
        e_i = std::max(e_i, std::fabs(integral[k] - ri));
        m_i = std::max(m_i, std::fabs(ri));
        // The right derivative is singular like (b - x)^(-alpha) at b.
        if (b - x >= 0.01 * (b - a)) {
          const double rr = oracle::right_rl_derivative(fn.f, fn.df, alpha, x, b);
          e_r = std::max(e_r, std::fabs(right[k] - rr));
          m_r = std::max(m_r, std::fabs(rr));
        }
      }
      r.require(e_c <= 1e-3 * m_c, tag + " caputo " + num(e_c / m_c));
      r.require(e_i <= 1e-3 * m_i, tag + " integral " + num(e_i / m_i));
      r.require(e_r <= 5e-2 * m_r, tag + " right derivative " + num(e_r / m_r));
    }
  }
  const double secs = seconds_since(t0);
  r.require(secs < 60.0, "runtime " + num(secs) + "s");
  return r;
}

Outcome criterion4() {
  Outcome r;
  const std::size_t n = 2001;
  const FractionalOrder ord(0.5);
  const auto f = sample(0, 1, n, [](double t) { return std::sin(t); });
  const auto g = sample(0, 1, n, [](double t) { return t * t; });
  const auto cf = left_caputo(f, ord);
  const auto rg = right_rl_derivative(g, ord);
  const auto ig = right_rl_integral(g, 1.0 - ord.value());
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    lhs[i] = g[i] * cf[i];
    rhs[i] = f[i] * rg[i];
  }
  const double h = f.grid().step();
  const double L = trapezoid(lhs, h);
  const double R = trapezoid(rhs, h) + ig[n - 1] * f[n - 1] - ig[0] * f[0];
  // Defect relative to 1 + |LHS|, with trapezoidal outer quadrature.
  const double defect = std::fabs(L - R) / (1.0 + std::fabs(L));
  r.require(defect < 1e-2, "relative defect " + num(defect));
  if (r.pass) r.detail = "relative defect " + num(defect);
  return r;
}

Outcome criterion5() {
  Outcome r;
  const auto s = sample(0, 1, 2001, [](double t) { return std::sin(t); });
  double prev = INFINITY;
  std::string trail;
  for (double alpha : {0.9, 0.99, 0.999}) {
    const auto d = left_caputo(s, FractionalOrder(alpha));
    double e = 0.0;
    // Node a carries the convention D(a) = 0.
    for (std::size_t k = 1; k < d.size(); ++k) e = std::max(e, std::fabs(d[k] - std::cos(s.grid().node(k))));
    r.require(e < prev, "not decreasing at alpha=" + num(alpha));
    trail += (trail.empty() ? "" : " > ") + num(e);
    prev = e;
  }
  if (r.pass) r.detail = "sup errors " + trail;
  return r;
}

Outcome criterion6() {
  Outcome r;
  SolverOptions o;
  {
    const std::string body = "alpha = 0.5\na = 0\nb = 2\nx_a = 0\nlagrangian = dx^2\nterminal_cost = xT\n";
    const auto free_rep = solve(from_text(body + "terminal.kind = vertical_line\nterminal.T = 1\n"), o);
    const auto loose = solve(
        from_text(body + "terminal.kind = truncated_vertical\nterminal.T = 1\nterminal.x_min = -100\n"), o);
    const double diff = sup_diff(loose.trajectory.values(), free_rep.trajectory.values());
    r.require(diff < 1e-8, "D non-binding diff " + num(diff));
    r.require(loose.kkt && !loose.kkt->active && loose.kkt->complementarity == 0.0, "D non-binding record");
    r.require(loose.residuals.complementarity && *loose.residuals.complementarity == 0.0, "D non-binding residual");

    const double free_end = free_rep.trajectory.terminal_value();
    const double x_min = free_end + 1.0;
    const auto tight = solve(from_text(body + "terminal.kind = truncated_vertical\nterminal.T = 1\nterminal.x_min = " +
                                       std::to_string(x_min) + "\n"),
                             o);
    r.require(tight.kkt && tight.kkt->active, "D binding inactive");
    r.require(tight.kkt && tight.kkt->sign_ok, "D binding sign");
    r.require(tight.kkt && std::fabs(tight.kkt->complementarity) < 1e-6, "D binding complementarity");
  }
  {
    const std::string body = "alpha = 0.5\na = 0\nb = 10\nx_a = 0\nlagrangian = t^2 - 1 + dx^2\nterminal.xT = 0\n";
    const auto free_rep = solve(from_text(body + "terminal.kind = horizontal_line\n"), o);
    const auto loose = solve(from_text(body + "terminal.kind = truncated_horizontal\nterminal.T_max = 5\n"), o);
    const double diff = sup_diff(loose.trajectory.values(), free_rep.trajectory.values());
    r.require(diff < 1e-8 && loose.T_star == free_rep.T_star, "E non-binding diff " + num(diff));
    r.require(loose.kkt && !loose.kkt->active && loose.kkt->complementarity == 0.0, "E non-binding record");
    r.require(loose.residuals.complementarity && *loose.residuals.complementarity == 0.0, "E non-binding residual");

    const auto tight = solve(from_text(body + "terminal.kind = truncated_horizontal\nterminal.T_max = 0.5\n"), o);
    r.require(tight.T_star == 0.5, "E binding T*=" + num(tight.T_star));
    r.require(tight.kkt && tight.kkt->active, "E binding inactive");
    r.require(tight.kkt && tight.kkt->sign_ok, "E binding sign");
    r.require(tight.kkt && std::fabs(tight.kkt->complementarity) < 1e-6, "E binding complementarity");
  }
  return r;
}

Outcome criterion7() {
  Outcome r;
  const auto free_p = from_text("alpha = 0.6\na = 0\nb = 4\nx_a = 0.5\nlagrangian = exp(-t)*dx^2 + x^2*cos(t)\n"
                                "terminal_cost = T*xT^2 + xT\nterminal.kind = free_both\n");
  const auto curve_p = from_text("alpha = 0.6\na = 0\nb = 4\nx_a = 0.5\nlagrangian = exp(-t)*dx^2 + x^2*cos(t)\n"
                                 "terminal.kind = terminal_curve\nterminal.psi = 0.5 + sin(t)\n");
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0), uT(0.3, 3.5);
  double worst_c = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double T = uT(rng);
    const double c1 = u(rng), c2 = u(rng), c3 = u(rng), w = 0.5 + 3.0 * std::fabs(u(rng));
    auto f = [&](double t) { return 0.5 + c1 * t + c2 * std::sin(w * t) + c3 * t * t; };
    const auto xf = trajectory(free_p, T, 101, f);
    const auto fb = transversality_as(CaseTag::FreeBoth, free_p, xf, T);
    const auto ca = transversality_as(CaseTag::A, free_p, xf, T);
    const auto cb = transversality_as(CaseTag::B, free_p, xf, T);
    if (!(*ca.R2 == *fb.R2 && *cb.R1 == *fb.R1)) r.require(false, "A/B mismatch at sample " + std::to_string(k));

    const auto xc = trajectory(curve_p, T, 101, f);
    const auto fc = transversality_as(CaseTag::FreeBoth, curve_p, xc, T);
    const auto cc = transversality_as(CaseTag::C, curve_p, xc, T);
    const double expected = *fc.R1 + curve_p.curve_prime(T) * *fc.R2;
    worst_c = std::max(worst_c, std::fabs(*cc.R1 - expected) / std::max(1.0, std::fabs(expected)));
  }
  r.require(worst_c <= 1e-12, "case C identity " + num(worst_c));
  return r;
}

Outcome criterion8() {
  Outcome r;
  const auto p = from_text("alpha = 0.5\na = 0\nb = 16\nx_a = 0\nlagrangian = -exp(-t)*(dx^2 + (x - 1)^2)\n"
                           "sense = max\nterminal.kind = infinite_horizon\nterminal.schedule = 1, 2, 4, 8, 16\n");
  const auto rep = solve(p, SolverOptions{});
  if (!rep.residuals.tail) {
    r.require(false, "no tail report");
    return r;
  }
  const auto& s = rep.residuals.tail->s_values;
  const std::size_t m = s.size();
  r.require(m == 5, "schedule length");
  if (m == 5) {
    r.require(std::fabs(s[3]) <= std::fabs(s[2]) && std::fabs(s[4]) <= std::fabs(s[3]), "|s| increases");
    if (r.pass) r.detail = "|s| " + num(std::fabs(s[2])) + " >= " + num(std::fabs(s[3])) + " >= " + num(std::fabs(s[4]));
  }
  r.require(rep.residuals.tail->trend_decreasing, "trend flag");
  r.require(rep.residuals.tail->approximate, "approximate label");
  return r;
}

Outcome criterion9() {
  Outcome r;
  constexpr Variable vars[] = {Variable::t, Variable::x, Variable::dx, Variable::T, Variable::xT, Variable::phiT};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  double worst = 0.0;
  for (auto src : corpus::kValid) {
    const Expr e = parse(src);
    Expr d[6] = {differentiate(e, vars[0]), differentiate(e, vars[1]), differentiate(e, vars[2]),
                 differentiate(e, vars[3]), differentiate(e, vars[4]), differentiate(e, vars[5])};
    for (int k = 0; k < 100; ++k) {
      Env env;
      for (Variable v : vars) env.set(v, u(rng));
      for (int i = 0; i < 6; ++i) {
        const double x0 = env.get(vars[i]);
        const double h = 1e-5 * std::max(1.0, std::fabs(x0));
        Env up = env, dn = env;
        up.set(vars[i], x0 + h);
        dn.set(vars[i], x0 - h);
        const double fd = (eval(e, up) - eval(e, dn)) / (2 * h);
        const double sym = eval(d[i], env);
        worst = std::max(worst, std::fabs(sym - fd) / std::max(1.0, std::fabs(sym)));
      }
    }
  }
  r.require(worst <= 1e-6, "derivative mismatch " + num(worst));
  int positioned = 0;
  for (const auto& m : corpus::kMalformed) {
    try {
      parse(m.source);
    } catch (const SyntaxError& e) {
      positioned += e.offset() == m.offset;
    } catch (const UnknownIdentifierError& e) {
      positioned += e.offset() == m.offset;
    }
  }
  r.require(positioned == 20, std::to_string(positioned) + "/20 malformed rejected at the right offset");
  if (r.pass) r.detail = "worst derivative mismatch " + num(worst) + ", 20/20 malformed";
  return r;
}

Outcome criterion10(const std::vector<std::string>& first) {
  Outcome r;
  std::vector<std::string> second;
  SolverOptions o;
  o.threads = 0;
  for (double alpha : {0.3, 0.5, 0.8}) {
    for (double x_a : {0.0, 2.0}) second.push_back(solve_dump(from_text(unit_time_text(alpha, x_a)), o));
  }
  second.push_back(solve_dump(from_text(kCurveText), o));
  r.require(first.size() == second.size(), "report count");
  for (std::size_t i = 0; i < std::min(first.size(), second.size()); ++i) {
    r.require(first[i] == second[i], "report " + std::to_string(i) + " differs");
  }
  return r;
}

}  // namespace

int main() {
  std::vector<std::string> dumps;
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", id, name, seconds_since(t0),
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
  };
  report(1, "unit-time example", [&] { return criterion1(dumps); });
  report(2, "curve constrained example near alpha = 1", [&] { return criterion2(dumps); });
  report(3, "operator oracle suite", criterion3);
  report(4, "integration by parts", criterion4);
  report(5, "alpha -> 1 ladder", criterion5);
  report(6, "KKT branches", criterion6);
  report(7, "case algebra identities", criterion7);
  report(8, "infinite-horizon tail", criterion8);
  report(9, "expression language", criterion9);
  report(10, "determinism", [&] { return criterion10(dumps); });
  return failures == 0 ? 0 : 1;
}
