#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fracvar {

/// The fixed variable set of the expression language.
///
///   t     running time
///   x     trajectory value x(t)
///   dx    left Caputo derivative of x at t
///   T     terminal time
///   xT    terminal value x(T)
///   phiT  value of the endpoint curve at the terminal time
enum class Variable : std::uint8_t { t, x, dx, T, xT, phiT };
inline constexpr std::size_t kVariableCount = 6;

std::string_view variable_name(Variable v);
std::optional<Variable> variable_from_name(std::string_view name);

/// Bit set over Variable.
using VariableMask = std::uint8_t;
constexpr VariableMask mask_of(Variable v) { return static_cast<VariableMask>(1u << static_cast<unsigned>(v)); }

/// sign is internal: it only appears as the derivative of abs.
enum class Function : std::uint8_t { sin, cos, exp, log, sqrt, abs, sign };

std::string_view function_name(Function f);

// ---------------------------------------------------------------------------
// Errors

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public ExprError {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, std::string found);
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifierError : public ExprError {
 public:
  UnknownIdentifierError(std::string name, std::size_t offset);
  const std::string& name() const { return name_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

class UnboundVariableError : public ExprError {
 public:
  explicit UnboundVariableError(Variable v);
  Variable variable() const { return variable_; }

 private:
  Variable variable_;
};

/// Evaluation left the reals; carries the offending subexpression.
class EvalDomainError : public ExprError {
 public:
  EvalDomainError(std::string what, std::string subexpression);
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

// ---------------------------------------------------------------------------

class Env;

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  enum class Kind : std::uint8_t { Number, Var, Neg, Add, Mul, Div, Pow, Call };

  // Raw constructors build exactly the node requested.
  static Expr number(double v);
  static Expr variable(Variable v);
  static Expr neg(Expr operand);
  static Expr add(Expr lhs, Expr rhs);
  static Expr mul(Expr lhs, Expr rhs);
  static Expr div(Expr lhs, Expr rhs);
  static Expr pow(Expr base, Expr exponent);
  static Expr call(Function f, Expr arg);

  Kind kind() const;
  double number_value() const;
  Variable var() const;
  Function function() const;
  /// Operand of Neg/Call, left child of binary nodes.
  const Expr& lhs() const;
  const Expr& rhs() const;

  VariableMask variables() const;
  bool uses(Variable v) const { return (variables() & mask_of(v)) != 0; }
  bool is_constant() const { return variables() == 0; }
  bool is_number(double v) const { return kind() == Kind::Number && number_value() == v; }

  /// Fully parenthesized canonical form; reparses to the same tree.
  std::string str() const;

  /// Structural equality.
  bool operator==(const Expr& other) const;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr binary(Kind kind, Expr lhs, Expr rhs);
  std::shared_ptr<const Node> node_;
  friend class CompiledExpr;
  friend double eval(const Expr& e, const Env& env);
};

/// Values bound to the variables; every bound value must be finite.
class Env {
 public:
  Env() = default;
  Env& set(Variable v, double value);
  double get(Variable v) const;
  bool bound(Variable v) const { return (bound_ & mask_of(v)) != 0; }
  VariableMask bound_mask() const { return bound_; }
  std::string str() const;

 private:
  std::array<double, kVariableCount> values_{};
  VariableMask bound_ = 0;
};

/// Parses source text. Precedence: ^ (right assoc) > unary - > * / > + -.
/// Subtraction a - b is represented as Add(a, Neg(b)).
Expr parse(std::string_view source);

double eval(const Expr& e, const Env& env);

/// Exact partial derivative with literal constant folding.
/// d/du abs(u) uses sign(u) with sign(0) = 0.
Expr differentiate(const Expr& e, Variable var);

/// Flattened postfix form of an Expr for repeated evaluation.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  double operator()(const Env& env) const;
  const Expr& source() const { return source_; }

 private:
  struct Instr {
    Expr::Kind kind;
    std::uint8_t index;  // Variable or Function
    double value;
    const Expr::Node* node;
  };
  Expr source_ = Expr::number(0.0);
  std::vector<Instr> program_;
  std::size_t max_depth_ = 0;
};

}  // namespace fracvar
