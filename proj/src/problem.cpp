#include "fracvar/problem.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace fracvar {

namespace {

std::string trim(std::string_view s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return std::string(s.substr(lo, hi - lo));
}

constexpr std::string_view kKindNames[] = {"free_both",          "vertical_line",        "horizontal_line",
                                           "terminal_curve",     "truncated_vertical",   "truncated_horizontal",
                                           "curve_constrained",  "infinite_horizon"};

}  // namespace

std::string_view terminal_kind_name(const TerminalCondition& tc) { return kKindNames[tc.index()]; }

std::string_view sense_name(Sense s) { return s == Sense::min ? "min" : "max"; }

ProblemError::ProblemError(std::string field, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + message),
      field_(std::move(field)),
      line_(line) {}

// ---------------------------------------------------------------------------

ProblemConfig ProblemConfig::parse(std::string_view text) {
  ProblemConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ProblemError("<file>", line_no, "expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ProblemError("<file>", line_no, "empty key");
    if (value.empty()) throw ProblemError(key, line_no, "empty value");
    if (cfg.entries.count(key)) throw ProblemError(key, line_no, "key given twice");
    cfg.entries.emplace(std::move(key), Entry{std::move(value), line_no});
    if (eol == text.size()) break;
  }
  return cfg;
}

ProblemConfig ProblemConfig::from_pairs(std::initializer_list<std::pair<std::string, std::string>> pairs) {
  ProblemConfig cfg;
  for (const auto& [k, v] : pairs) cfg.set(k, v);
  return cfg;
}

void ProblemConfig::set(const std::string& key, std::string value) { entries[key] = Entry{std::move(value), 0}; }

const ProblemConfig::Entry* ProblemConfig::find(const std::string& key) const {
  const auto it = entries.find(key);
  return it == entries.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------

namespace {

class Reader {
 public:
  explicit Reader(const ProblemConfig& cfg) : cfg_(cfg) {}

  const ProblemConfig::Entry& require(const std::string& key) {
    used_.insert(key);
    const auto* e = cfg_.find(key);
    if (!e) throw ProblemError(key, 0, "missing required key");
    return *e;
  }

  const ProblemConfig::Entry* optional(const std::string& key) {
    used_.insert(key);
    return cfg_.find(key);
  }

  double number(const std::string& key) { return to_number(key, require(key)); }

  static double to_number(const std::string& key, const ProblemConfig::Entry& e) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
      throw ProblemError(key, e.line, "expected a finite number, got '" + e.value + "'");
    }
    return v;
  }

  Expr expression(const std::string& key) { return to_expr(key, require(key)); }

  static Expr to_expr(const std::string& key, const ProblemConfig::Entry& e) {
    try {
      return parse(e.value);
    } catch (const ExprError& err) {
      throw ProblemError(key, e.line, err.what());
    }
  }

  void reject_unused() const {
    for (const auto& [key, entry] : cfg_.entries) {
      if (used_.count(key) || key.rfind("solver.", 0) == 0) continue;
      throw ProblemError(key, entry.line, "unknown key for this problem");
    }
  }

  int line_of(const std::string& key) const {
    const auto* e = cfg_.find(key);
    return e ? e->line : 0;
  }

 private:
  const ProblemConfig& cfg_;
  std::set<std::string> used_;
};

void require_variables(const Expr& e, VariableMask allowed, const std::string& key, int line) {
  const VariableMask extra = static_cast<VariableMask>(e.variables() & ~allowed);
  if (!extra) return;
  for (std::size_t i = 0; i < kVariableCount; ++i) {
    if (extra & (1u << i)) {
      throw ProblemError(key, line,
                         "variable '" + std::string(variable_name(static_cast<Variable>(i))) +
                             "' is not allowed here");
    }
  }
}

std::vector<double> parse_schedule(const std::string& key, const ProblemConfig::Entry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(Reader::to_number(key, ProblemConfig::Entry{trim(item), e.line}));
  }
  return out;
}

}  // namespace

std::vector<double> default_schedule(double a) {
  std::vector<double> s;
  for (int k = 0; k <= 6; ++k) s.push_back(a + std::ldexp(1.0, k));
  return s;
}

VariationalProblem build_problem(const ProblemConfig& config) {
  Reader r(config);
  VariationalProblem p;

  const double alpha = r.number("alpha");
  try {
    p.order_ = FractionalOrder(alpha);
  } catch (const std::invalid_argument& e) {
    throw ProblemError("alpha", r.line_of("alpha"), e.what());
  }
  p.a_ = r.number("a");
  p.b_ = r.number("b");
  if (!(p.a_ < p.b_)) throw ProblemError("b", r.line_of("b"), "need a < b");
  p.x_a_ = r.number("x_a");

  if (const auto* s = r.optional("sense")) {
    if (s->value == "min") {
      p.sense_ = Sense::min;
    } else if (s->value == "max") {
      p.sense_ = Sense::max;
    } else {
      throw ProblemError("sense", s->line, "expected 'min' or 'max'");
    }
  }

  const auto& kind = r.require("terminal.kind");
  const std::string& k = kind.value;
  const VariableMask only_t = mask_of(Variable::t);
  auto in_range = [&](const std::string& key, double v) {
    if (!(p.a_ < v && v <= p.b_)) throw ProblemError(key, r.line_of(key), "must satisfy a < value <= b");
  };
  if (k == "free_both") {
    p.terminal_ = FreeBoth{};
  } else if (k == "vertical_line") {
    const double T = r.number("terminal.T");
    in_range("terminal.T", T);
    p.terminal_ = VerticalLine{T};
  } else if (k == "horizontal_line") {
    p.terminal_ = HorizontalLine{r.number("terminal.xT")};
  } else if (k == "terminal_curve") {
    Expr psi = r.expression("terminal.psi");
    require_variables(psi, only_t, "terminal.psi", r.line_of("terminal.psi"));
    p.terminal_ = TerminalCurve{psi};
  } else if (k == "truncated_vertical") {
    const double T = r.number("terminal.T");
    in_range("terminal.T", T);
    p.terminal_ = TruncatedVertical{T, r.number("terminal.x_min")};
  } else if (k == "truncated_horizontal") {
    const double xT = r.number("terminal.xT");
    const double T_max = r.number("terminal.T_max");
    in_range("terminal.T_max", T_max);
    p.terminal_ = TruncatedHorizontal{xT, T_max};
  } else if (k == "curve_constrained") {
    Expr phi = r.expression("terminal.phi");
    require_variables(phi, only_t, "terminal.phi", r.line_of("terminal.phi"));
    p.terminal_ = CurveConstrained{phi};
  } else if (k == "infinite_horizon") {
    std::vector<double> schedule;
    if (const auto* e = r.optional("terminal.schedule")) {
      schedule = parse_schedule("terminal.schedule", *e);
    } else {
      schedule = default_schedule(p.a_);
    }
    const int line = r.line_of("terminal.schedule");
    if (schedule.size() < 3) throw ProblemError("terminal.schedule", line, "need at least 3 truncation times");
    if (!(schedule.front() > p.a_)) throw ProblemError("terminal.schedule", line, "first entry must exceed a");
    for (std::size_t i = 1; i < schedule.size(); ++i) {
      if (!(schedule[i] > schedule[i - 1])) {
        throw ProblemError("terminal.schedule", line, "entries must be strictly increasing");
      }
    }
    if (p.sense_ != Sense::max) {
      throw ProblemError("sense", r.line_of("sense"), "infinite_horizon problems are posed as maximization");
    }
    p.terminal_ = InfiniteHorizon{std::move(schedule)};
  } else {
    throw ProblemError("terminal.kind", kind.line, "unknown terminal kind '" + k + "'");
  }

  p.lagrangian_ = r.expression("lagrangian");
  const int l_line = r.line_of("lagrangian");
  if (p.lagrangian_.uses(Variable::phiT) && !p.curve_constrained()) {
    throw ProblemError("lagrangian", l_line, "phiT is only allowed with terminal.kind = curve_constrained");
  }
  VariableMask allowed = mask_of(Variable::t) | mask_of(Variable::x) | mask_of(Variable::dx);
  if (p.curve_constrained()) allowed |= mask_of(Variable::phiT);
  require_variables(p.lagrangian_, allowed, "lagrangian", l_line);

  if (const auto* e = r.optional("terminal_cost")) {
    if (p.curve_constrained() || std::holds_alternative<InfiniteHorizon>(p.terminal_)) {
      throw ProblemError("terminal_cost", e->line, "no terminal cost for " + std::string(terminal_kind_name(p.terminal_)));
    }
    Expr cost = Reader::to_expr("terminal_cost", *e);
    require_variables(cost, mask_of(Variable::T) | mask_of(Variable::xT), "terminal_cost", e->line);
    p.terminal_cost_ = cost;
  }

  r.reject_unused();

  p.dL_dx_ = differentiate(p.lagrangian_, Variable::x);
  p.dL_ddx_ = differentiate(p.lagrangian_, Variable::dx);
  p.L_ = CompiledExpr(p.lagrangian_);
  p.L_x_ = CompiledExpr(p.dL_dx_);
  p.L_dx_ = CompiledExpr(p.dL_ddx_);
  if (p.lagrangian_.uses(Variable::phiT)) {
    p.dL_dphiT_ = differentiate(p.lagrangian_, Variable::phiT);
    p.L_phiT_ = CompiledExpr(*p.dL_dphiT_);
  }
  if (p.terminal_cost_) {
    p.phi_ = CompiledExpr(*p.terminal_cost_);
    p.phi_T_ = CompiledExpr(differentiate(*p.terminal_cost_, Variable::T));
    p.phi_xT_ = CompiledExpr(differentiate(*p.terminal_cost_, Variable::xT));
  }
  const Expr* curve = nullptr;
  if (const auto* tc = std::get_if<TerminalCurve>(&p.terminal_)) curve = &tc->psi;
  if (const auto* cc = std::get_if<CurveConstrained>(&p.terminal_)) curve = &cc->phi_curve;
  if (curve) {
    p.curve_ = CompiledExpr(*curve);
    p.curve_prime_ = CompiledExpr(differentiate(*curve, Variable::t));
  }
  return p;
}

// ---------------------------------------------------------------------------

double VariationalProblem::L_phiT(const Env& env) const { return dL_dphiT_ ? L_phiT_(env) : 0.0; }

namespace {

Env terminal_env(double T, double xT) {
  Env env;
  env.set(Variable::T, T).set(Variable::xT, xT);
  return env;
}

}  // namespace

double VariationalProblem::phi(double T, double xT) const { return phi_ ? (*phi_)(terminal_env(T, xT)) : 0.0; }
double VariationalProblem::phi_T(double T, double xT) const { return phi_T_ ? (*phi_T_)(terminal_env(T, xT)) : 0.0; }
double VariationalProblem::phi_xT(double T, double xT) const {
  return phi_xT_ ? (*phi_xT_)(terminal_env(T, xT)) : 0.0;
}

double VariationalProblem::curve(double t) const {
  if (!curve_) throw std::logic_error("problem has no endpoint curve");
  Env env;
  env.set(Variable::t, t);
  return (*curve_)(env);
}

double VariationalProblem::curve_prime(double t) const {
  if (!curve_prime_) throw std::logic_error("problem has no endpoint curve");
  Env env;
  env.set(Variable::t, t);
  return (*curve_prime_)(env);
}

}  // namespace fracvar
