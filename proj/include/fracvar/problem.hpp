#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fracvar/expr.hpp"
#include "fracvar/grid.hpp"

namespace fracvar {

// Terminal structures. Each alternative carries exactly its payload.
struct FreeBoth {};
struct VerticalLine {
  double T_fixed;
};
struct HorizontalLine {
  double xT_fixed;
};
struct TerminalCurve {
  Expr psi;  // in t
};
struct TruncatedVertical {
  double T_fixed;
  double x_min;
};
struct TruncatedHorizontal {
  double xT_fixed;
  double T_max;
};
/// x(T) = phi(T), and the Lagrangian may read phiT.
struct CurveConstrained {
  Expr phi_curve;  // in t
};
struct InfiniteHorizon {
  std::vector<double> schedule;
};

using TerminalCondition = std::variant<FreeBoth, VerticalLine, HorizontalLine, TerminalCurve, TruncatedVertical,
                                       TruncatedHorizontal, CurveConstrained, InfiniteHorizon>;

std::string_view terminal_kind_name(const TerminalCondition& tc);

enum class Sense { min, max };

std::string_view sense_name(Sense s);

/// A problem file or a validation step went wrong. field() is the key path
/// (e.g. "terminal.T_max"); line() is the 1-based source line or 0.
class ProblemError : public std::runtime_error {
 public:
  ProblemError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Raw key = value entries of a problem file.
struct ProblemConfig {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries;

  /// Parses line-oriented text: `key = value`, `#` starts a comment, blank
  /// lines are skipped, repeated keys are an error.
  static ProblemConfig parse(std::string_view text);
  static ProblemConfig from_pairs(std::initializer_list<std::pair<std::string, std::string>> pairs);

  /// Replaces or inserts a key (used for command-line overrides).
  void set(const std::string& key, std::string value);
  const Entry* find(const std::string& key) const;
};

/// A validated fractional variational problem. Immutable.
///
/// The partial derivatives of L and phi are formed symbolically at build
/// time and stored next to compiled evaluators.
class VariationalProblem {
 public:
  const Expr& lagrangian() const { return lagrangian_; }
  const std::optional<Expr>& terminal_cost() const { return terminal_cost_; }
  FractionalOrder order() const { return order_; }
  double alpha() const { return order_.value(); }
  double a() const { return a_; }
  double b() const { return b_; }
  double x_a() const { return x_a_; }
  const TerminalCondition& terminal() const { return terminal_; }
  Sense sense() const { return sense_; }
  /// +1 for min, -1 for max: the solver minimizes sign() * J.
  double sign() const { return sense_ == Sense::min ? 1.0 : -1.0; }

  // d/dx L, d/d(dx) L, d/d(phiT) L
  const Expr& dL_dx() const { return dL_dx_; }
  const Expr& dL_ddx() const { return dL_ddx_; }
  const std::optional<Expr>& dL_dphiT() const { return dL_dphiT_; }

  bool uses_phiT() const { return dL_dphiT_.has_value(); }
  bool curve_constrained() const { return std::holds_alternative<CurveConstrained>(terminal_); }

  // Compiled evaluators; env must bind t, x, dx (and phiT when used).
  double L(const Env& env) const { return L_(env); }
  double L_x(const Env& env) const { return L_x_(env); }
  double L_dx(const Env& env) const { return L_dx_(env); }
  double L_phiT(const Env& env) const;

  /// phi(T, xT), or 0 when absent.
  double phi(double T, double xT) const;
  double phi_T(double T, double xT) const;
  double phi_xT(double T, double xT) const;

  /// The endpoint curve psi (terminal_curve) or phi (curve_constrained).
  bool has_curve() const { return curve_.has_value(); }
  double curve(double t) const;
  double curve_prime(double t) const;

 private:
  friend VariationalProblem build_problem(const ProblemConfig& config);
  VariationalProblem() : order_(0.5) {}

  Expr lagrangian_ = Expr::number(0.0);
  std::optional<Expr> terminal_cost_;
  FractionalOrder order_;
  double a_ = 0.0;
  double b_ = 1.0;
  double x_a_ = 0.0;
  TerminalCondition terminal_;
  Sense sense_ = Sense::min;

  Expr dL_dx_ = Expr::number(0.0);
  Expr dL_ddx_ = Expr::number(0.0);
  std::optional<Expr> dL_dphiT_;

  CompiledExpr L_, L_x_, L_dx_, L_phiT_;
  std::optional<CompiledExpr> phi_, phi_T_, phi_xT_;
  std::optional<CompiledExpr> curve_, curve_prime_;
};

/// Validates a parsed problem file. Keys under "solver." are left for the
/// solver options; any other unknown key is rejected.
VariationalProblem build_problem(const ProblemConfig& config);

/// Default infinite-horizon truncation schedule a + 2^k, k = 0..6.
std::vector<double> default_schedule(double a);

}  // namespace fracvar
