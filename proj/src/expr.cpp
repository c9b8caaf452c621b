#include "fracvar/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace fracvar {

namespace {

constexpr std::array<std::string_view, kVariableCount> kVariableNames = {"t", "x", "dx", "T", "xT", "phiT"};
constexpr std::array<std::string_view, 7> kFunctionNames = {"sin", "cos", "exp", "log", "sqrt", "abs", "sign"};
// functions reachable from source text
constexpr std::size_t kUserFunctionCount = 6;

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

std::string_view variable_name(Variable v) { return kVariableNames[static_cast<std::size_t>(v)]; }

std::optional<Variable> variable_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kVariableCount; ++i) {
    if (kVariableNames[i] == name) return static_cast<Variable>(i);
  }
  return std::nullopt;
}

std::string_view function_name(Function f) { return kFunctionNames[static_cast<std::size_t>(f)]; }

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected, std::string found)
    : ExprError("syntax error at offset " + std::to_string(offset) + ": expected " + join(expected) + ", found " +
                found),
      offset_(offset),
      expected_(std::move(expected)) {}

UnknownIdentifierError::UnknownIdentifierError(std::string name, std::size_t offset)
    : ExprError("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
      name_(std::move(name)),
      offset_(offset) {}

UnboundVariableError::UnboundVariableError(Variable v)
    : ExprError("unbound variable '" + std::string(variable_name(v)) + "'"), variable_(v) {}

EvalDomainError::EvalDomainError(std::string what, std::string subexpression)
    : ExprError(what + " in " + subexpression), subexpression_(std::move(subexpression)) {}

// ---------------------------------------------------------------------------
// Nodes

struct Expr::Node {
  Kind kind;
  double value = 0.0;
  std::uint8_t index = 0;
  VariableMask vars = 0;
  std::optional<Expr> lhs;
  std::optional<Expr> rhs;
};

namespace {

std::string node_str(const Expr::Node& n);

}  // namespace

Expr Expr::number(double v) { return Expr(std::make_shared<const Node>(Node{Kind::Number, v, 0, 0, std::nullopt, std::nullopt})); }

Expr Expr::variable(Variable v) {
  return Expr(std::make_shared<const Node>(Node{Kind::Var, 0.0, static_cast<std::uint8_t>(v), mask_of(v), std::nullopt, std::nullopt}));
}

Expr Expr::neg(Expr operand) {
  const auto vars = operand.variables();
  return Expr(std::make_shared<const Node>(Node{Kind::Neg, 0.0, 0, vars, std::move(operand), std::nullopt}));
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs) {
  const auto vars = static_cast<VariableMask>(lhs.variables() | rhs.variables());
  return Expr(std::make_shared<const Node>(Node{kind, 0.0, 0, vars, std::move(lhs), std::move(rhs)}));
}

Expr Expr::add(Expr lhs, Expr rhs) { return binary(Kind::Add, std::move(lhs), std::move(rhs)); }
Expr Expr::mul(Expr lhs, Expr rhs) { return binary(Kind::Mul, std::move(lhs), std::move(rhs)); }
Expr Expr::div(Expr lhs, Expr rhs) { return binary(Kind::Div, std::move(lhs), std::move(rhs)); }
Expr Expr::pow(Expr base, Expr exponent) { return binary(Kind::Pow, std::move(base), std::move(exponent)); }

Expr Expr::call(Function f, Expr arg) {
  const auto vars = arg.variables();
  return Expr(std::make_shared<const Node>(
      Node{Kind::Call, 0.0, static_cast<std::uint8_t>(f), vars, std::move(arg), std::nullopt}));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->value; }
Variable Expr::var() const { return static_cast<Variable>(node_->index); }
Function Expr::function() const { return static_cast<Function>(node_->index); }
const Expr& Expr::lhs() const { return *node_->lhs; }
const Expr& Expr::rhs() const { return *node_->rhs; }
VariableMask Expr::variables() const { return node_->vars; }

bool Expr::operator==(const Expr& other) const {
  if (node_ == other.node_) return true;
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Number:
      return a.value == b.value;
    case Kind::Var:
      return a.index == b.index;
    case Kind::Neg:
      return *a.lhs == *b.lhs;
    case Kind::Call:
      return a.index == b.index && *a.lhs == *b.lhs;
    default:
      return *a.lhs == *b.lhs && *a.rhs == *b.rhs;
  }
}

std::string Expr::str() const { return node_str(*node_); }

namespace {

std::string node_str(const Expr::Node& n) {
  using K = Expr::Kind;
  switch (n.kind) {
    case K::Number:
      return n.value < 0 ? "(" + format_number(n.value) + ")" : format_number(n.value);
    case K::Var:
      return std::string(kVariableNames[n.index]);
    case K::Neg:
      return "(-" + n.lhs->str() + ")";
    case K::Call:
      return std::string(kFunctionNames[n.index]) + "(" + n.lhs->str() + ")";
    case K::Add:
      return "(" + n.lhs->str() + " + " + n.rhs->str() + ")";
    case K::Mul:
      return "(" + n.lhs->str() + " * " + n.rhs->str() + ")";
    case K::Div:
      return "(" + n.lhs->str() + " / " + n.rhs->str() + ")";
    case K::Pow:
      return "(" + n.lhs->str() + " ^ " + n.rhs->str() + ")";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------------------
// Env

Env& Env::set(Variable v, double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("env: non-finite value for '" + std::string(variable_name(v)) + "'");
  }
  values_[static_cast<std::size_t>(v)] = value;
  bound_ |= mask_of(v);
  return *this;
}

double Env::get(Variable v) const {
  if (!bound(v)) throw UnboundVariableError(v);
  return values_[static_cast<std::size_t>(v)];
}

std::string Env::str() const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (std::size_t i = 0; i < kVariableCount; ++i) {
    if (!(bound_ & (1u << i))) continue;
    if (!first) os << ", ";
    first = false;
    os << kVariableNames[i] << ": " << format_number(values_[i]);
  }
  os << "}";
  return os.str();
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    Expr e = parse_sum();
    skip_space();
    if (pos_ != src_.size()) fail({"operator", "end of input"});
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_space() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    skip_space();
    std::string found = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    throw SyntaxError(pos_, std::move(expected), std::move(found));
  }

  static std::vector<std::string> operand_start() { return {"number", "identifier", "'('", "'-'"}; }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      const char c = peek();
      if (c == '+') {
        ++pos_;
        lhs = Expr::add(std::move(lhs), parse_product());
      } else if (c == '-') {
        ++pos_;
        lhs = Expr::add(std::move(lhs), Expr::neg(parse_product()));
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      const char c = peek();
      if (c == '*') {
        ++pos_;
        lhs = Expr::mul(std::move(lhs), parse_unary());
      } else if (c == '/') {
        ++pos_;
        lhs = Expr::div(std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (peek() == '-') {
      ++pos_;
      return Expr::neg(parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (peek() == '^') {
      ++pos_;
      return Expr::pow(std::move(base), parse_unary());
    }
    return base;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  Expr parse_primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      if (peek() != ')') fail({"operator", "')'"});
      ++pos_;
      return inner;
    }
    if (digit(c) || (c == '.' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]))) return parse_number();
    if (ident_start(c)) return parse_identifier();
    fail(operand_start());
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && digit(src_[p])) {
        pos_ = p;
        while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      } else {
        pos_ = p;
        fail({"exponent digits"});
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      fail({"finite number"});
    }
    return Expr::number(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    for (std::size_t i = 0; i < kUserFunctionCount; ++i) {
      if (kFunctionNames[i] == name) {
        if (peek() != '(') fail({"'('"});
        ++pos_;
        Expr arg = parse_sum();
        if (peek() != ')') fail({"operator", "')'"});
        ++pos_;
        return Expr::call(static_cast<Function>(i), std::move(arg));
      }
    }
    if (auto v = variable_from_name(name)) return Expr::variable(*v);
    throw UnknownIdentifierError(std::string(name), start);
  }
};

}  // namespace

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void domain_fail(const char* what, const Expr::Node& n) { throw EvalDomainError(what, node_str(n)); }

double apply_function(Function f, double u, const Expr::Node& n) {
  switch (f) {
    case Function::sin:
      return std::sin(u);
    case Function::cos:
      return std::cos(u);
    case Function::exp:
      return std::exp(u);
    case Function::log:
      if (!(u > 0.0)) domain_fail("log of non-positive value", n);
      return std::log(u);
    case Function::sqrt:
      if (u < 0.0) domain_fail("sqrt of negative value", n);
      return std::sqrt(u);
    case Function::abs:
      return std::fabs(u);
    case Function::sign:
      return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
  }
  return 0.0;
}

double apply_binary(Expr::Kind k, double a, double b, const Expr::Node& n) {
  switch (k) {
    case Expr::Kind::Add:
      return a + b;
    case Expr::Kind::Mul:
      return a * b;
    case Expr::Kind::Div:
      if (b == 0.0) domain_fail("division by zero", n);
      return a / b;
    case Expr::Kind::Pow:
      if (a < 0.0 && b != std::trunc(b)) domain_fail("negative base with non-integer exponent", n);
      if (a == 0.0 && b < 0.0) domain_fail("zero base with negative exponent", n);
      return std::pow(a, b);
    default:
      return 0.0;
  }
}

double checked(double v, const Expr::Node& n) {
  if (!std::isfinite(v)) domain_fail("non-finite result", n);
  return v;
}

}  // namespace

double eval(const Expr& e, const Env& env) {
  const Expr::Node& n = *e.node_;
  using K = Expr::Kind;
  switch (n.kind) {
    case K::Number:
      return n.value;
    case K::Var:
      return env.get(static_cast<Variable>(n.index));
    case K::Neg:
      return -eval(*n.lhs, env);
    case K::Call:
      return checked(apply_function(static_cast<Function>(n.index), eval(*n.lhs, env), n), n);
    default: {
      const double a = eval(*n.lhs, env);
      const double b = eval(*n.rhs, env);
      return checked(apply_binary(n.kind, a, b, n), n);
    }
  }
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

// Folding constructors: literal arithmetic is evaluated, additive and
// multiplicative identities are dropped. Nothing else is simplified.
Expr f_number(double v) { return Expr::number(v == 0.0 ? 0.0 : v); }

Expr f_neg(const Expr& a) {
  if (a.kind() == Expr::Kind::Number) return f_number(0.0 - a.number_value());
  if (a.kind() == Expr::Kind::Neg) return a.lhs();
  return Expr::neg(a);
}

Expr f_add(const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::Number && b.kind() == Expr::Kind::Number) {
    return f_number(a.number_value() + b.number_value());
  }
  if (a.is_number(0.0)) return b;
  if (b.is_number(0.0)) return a;
  return Expr::add(a, b);
}

Expr f_mul(const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::Number && b.kind() == Expr::Kind::Number) {
    return f_number(a.number_value() * b.number_value());
  }
  if (a.is_number(0.0) || b.is_number(0.0)) return f_number(0.0);
  if (a.is_number(1.0)) return b;
  if (b.is_number(1.0)) return a;
  return Expr::mul(a, b);
}

Expr f_div(const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::Number && b.kind() == Expr::Kind::Number && b.number_value() != 0.0) {
    return f_number(a.number_value() / b.number_value());
  }
  if (a.is_number(0.0)) return f_number(0.0);
  if (b.is_number(1.0)) return a;
  return Expr::div(a, b);
}

Expr f_pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_number(0.0)) return f_number(1.0);
  if (exponent.is_number(1.0)) return base;
  if (base.kind() == Expr::Kind::Number && exponent.kind() == Expr::Kind::Number) {
    const double v = std::pow(base.number_value(), exponent.number_value());
    if (std::isfinite(v)) return f_number(v);
  }
  return Expr::pow(base, exponent);
}

Expr f_call(Function f, const Expr& arg) {
  if (arg.kind() == Expr::Kind::Number) {
    try {
      return f_number(eval(Expr::call(f, arg), Env{}));
    } catch (const EvalDomainError&) {
      // leave the call in place; evaluation will report it
    }
  }
  return Expr::call(f, arg);
}

// Variable-free subtrees fold to a literal when they evaluate cleanly.
Expr fold_constant(const Expr& e) {
  if (e.kind() == Expr::Kind::Number || !e.is_constant()) return e;
  try {
    return f_number(eval(e, Env{}));
  } catch (const EvalDomainError&) {
    return e;
  }
}

}  // namespace

Expr differentiate(const Expr& e, Variable var) {
  using K = Expr::Kind;
  if (!e.uses(var)) return f_number(0.0);
  switch (e.kind()) {
    case K::Number:
      return f_number(0.0);
    case K::Var:
      return f_number(e.var() == var ? 1.0 : 0.0);
    case K::Neg:
      return f_neg(differentiate(e.lhs(), var));
    case K::Add:
      return f_add(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
    case K::Mul: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      return f_add(f_mul(differentiate(u, var), v), f_mul(u, differentiate(v, var)));
    }
    case K::Div: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      const Expr du = differentiate(u, var);
      const Expr dv = differentiate(v, var);
      if (dv.is_number(0.0)) return f_div(du, v);
      const Expr numer = f_add(f_mul(du, v), f_neg(f_mul(u, dv)));
      return f_div(numer, f_pow(v, f_number(2.0)));
    }
    case K::Pow: {
      const Expr& base = e.lhs();
      const Expr exponent = fold_constant(e.rhs());
      if (exponent.is_constant()) {
        Expr lowered = exponent.kind() == K::Number ? f_number(exponent.number_value() - 1.0)
                                                    : f_add(exponent, f_number(-1.0));
        return f_mul(f_mul(exponent, f_pow(base, lowered)), differentiate(base, var));
      }
      // b^w = exp(w log b)
      const Expr rewritten = Expr::call(Function::exp, Expr::mul(exponent, Expr::call(Function::log, base)));
      return differentiate(rewritten, var);
    }
    case K::Call: {
      const Expr& u = e.lhs();
      const Expr du = differentiate(u, var);
      switch (e.function()) {
        case Function::sin:
          return f_mul(f_call(Function::cos, u), du);
        case Function::cos:
          return f_mul(f_neg(f_call(Function::sin, u)), du);
        case Function::exp:
          return f_mul(e, du);
        case Function::log:
          return f_div(du, u);
        case Function::sqrt:
          return f_div(du, f_mul(f_number(2.0), e));
        case Function::abs:
          return f_mul(f_call(Function::sign, u), du);
        case Function::sign:
          return f_number(0.0);
      }
    }
  }
  return f_number(0.0);
}

// ---------------------------------------------------------------------------
// Compiled form

CompiledExpr::CompiledExpr(const Expr& e) : source_(e) {
  std::size_t depth = 0;
  auto emit = [&](auto&& self, const Expr& node) -> void {
    const Expr::Node& n = *node.node_;
    switch (n.kind) {
      case Expr::Kind::Number:
      case Expr::Kind::Var:
        program_.push_back({n.kind, n.index, n.value, &n});
        max_depth_ = std::max(max_depth_, ++depth);
        return;
      case Expr::Kind::Neg:
      case Expr::Kind::Call:
        self(self, *n.lhs);
        program_.push_back({n.kind, n.index, 0.0, &n});
        return;
      default:
        self(self, *n.lhs);
        self(self, *n.rhs);
        program_.push_back({n.kind, n.index, 0.0, &n});
        --depth;
        return;
    }
  };
  emit(emit, e);
}

double CompiledExpr::operator()(const Env& env) const {
  constexpr std::size_t kInline = 32;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(max_depth_);
    stack = heap.data();
  }
  std::size_t top = 0;
  for (const Instr& ins : program_) {
    switch (ins.kind) {
      case Expr::Kind::Number:
        stack[top++] = ins.value;
        break;
      case Expr::Kind::Var:
        stack[top++] = env.get(static_cast<Variable>(ins.index));
        break;
      case Expr::Kind::Neg:
        stack[top - 1] = -stack[top - 1];
        break;
      case Expr::Kind::Call:
        stack[top - 1] =
            checked(apply_function(static_cast<Function>(ins.index), stack[top - 1], *ins.node), *ins.node);
        break;
      default: {
        const double b = stack[--top];
        stack[top - 1] = checked(apply_binary(ins.kind, stack[top - 1], b, *ins.node), *ins.node);
        break;
      }
    }
  }
  return stack[0];
}

}  // namespace fracvar
