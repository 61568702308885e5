#pragma once

// Arithmetic expressions over named variables with exact first and second
// derivatives. Every piece of model data (anchor, structure functions,
// Lagrangians, candidate sections) is written in this language.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' INT)?
//   atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' | '-' atom
//
// Note that '-' binds tighter than '^': "-x^2" is (-x)^2.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "algmech/error.hpp"

namespace algmech::expr {

enum class Op : std::uint8_t { constant, variable, add, sub, mul, div, pow, neg, sin, cos, exp, ln, sqrt };

inline bool is_binary(Op op) {
  return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div;
}
inline bool is_function(Op op) { return op >= Op::neg; }

inline std::string_view function_name(Op op) {
  switch (op) {
    case Op::neg: return "neg";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::ln: return "ln";
    case Op::sqrt: return "sqrt";
    default: return "";
  }
}

/// Immutable expression tree. Copies share structure.
class Expression {
  struct Node {
    Op op = Op::constant;
    double value = 0.0;
    int exponent = 0;
    std::string name;
    std::shared_ptr<const Node> a, b;
  };

 public:
  Expression() : Expression(constant(0.0)) {}

  static Expression constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = v;
    return Expression(std::move(n));
  }
  static Expression variable(std::string name) {
    auto n = std::make_shared<Node>();
    n->op = Op::variable;
    n->name = std::move(name);
    return Expression(std::move(n));
  }
  static Expression binary(Op op, const Expression& lhs, const Expression& rhs) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = lhs.node_;
    n->b = rhs.node_;
    return Expression(std::move(n));
  }
  static Expression unary(Op op, const Expression& arg) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = arg.node_;
    return Expression(std::move(n));
  }
  static Expression power(const Expression& base, int exponent) {
    auto n = std::make_shared<Node>();
    n->op = Op::pow;
    n->exponent = exponent;
    n->a = base.node_;
    return Expression(std::move(n));
  }

  Op op() const { return node_->op; }
  double constant_value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  int exponent() const { return node_->exponent; }
  /// First operand (the argument for unary nodes and powers).
  Expression lhs() const { return Expression(node_->a); }
  Expression rhs() const { return Expression(node_->b); }

  friend bool operator==(const Expression& x, const Expression& y) { return equal(*x.node_, *y.node_); }

 private:
  explicit Expression(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static bool equal(const Node& x, const Node& y) {
    if (&x == &y) return true;
    if (x.op != y.op) return false;
    switch (x.op) {
      case Op::constant: return x.value == y.value;
      case Op::variable: return x.name == y.name;
      case Op::pow: return x.exponent == y.exponent && equal(*x.a, *y.a);
      default:
        if (is_binary(x.op)) return equal(*x.a, *y.a) && equal(*x.b, *y.b);
        return equal(*x.a, *y.a);
    }
  }

  std::shared_ptr<const Node> node_;
};

inline Expression operator+(const Expression& a, const Expression& b) { return Expression::binary(Op::add, a, b); }
inline Expression operator-(const Expression& a, const Expression& b) { return Expression::binary(Op::sub, a, b); }
inline Expression operator*(const Expression& a, const Expression& b) { return Expression::binary(Op::mul, a, b); }
inline Expression operator/(const Expression& a, const Expression& b) { return Expression::binary(Op::div, a, b); }
inline Expression operator-(const Expression& a) { return Expression::unary(Op::neg, a); }
inline Expression operator*(double c, const Expression& b) { return Expression::constant(c) * b; }
inline Expression operator+(const Expression& a, double c) { return a + Expression::constant(c); }
inline Expression pow(const Expression& a, int n) { return Expression::power(a, n); }
inline Expression sin(const Expression& a) { return Expression::unary(Op::sin, a); }
inline Expression cos(const Expression& a) { return Expression::unary(Op::cos, a); }
inline Expression exp(const Expression& a) { return Expression::unary(Op::exp, a); }
inline Expression ln(const Expression& a) { return Expression::unary(Op::ln, a); }
inline Expression sqrt(const Expression& a) { return Expression::unary(Op::sqrt, a); }
inline Expression var(std::string name) { return Expression::variable(std::move(name)); }
inline Expression num(double v) { return Expression::constant(v); }

// ---------------------------------------------------------------------------
// Printing

/// Shortest decimal text that reads back to exactly `v`.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace detail {

inline void print(const Expression& e, std::string& out);

inline void print_atom(const Expression& e, std::string& out) {
  const Op op = e.op();
  const bool bare = op == Op::variable || (op == Op::constant && !std::signbit(e.constant_value())) ||
                    (is_function(op) && op != Op::neg);
  if (bare) {
    print(e, out);
  } else if (op == Op::neg && e.lhs().op() != Op::pow) {
    print(e, out);
  } else {
    out += '(';
    print(e, out);
    out += ')';
  }
}

inline void print(const Expression& e, std::string& out) {
  switch (e.op()) {
    case Op::constant: out += format_number(e.constant_value()); return;
    case Op::variable: out += e.name(); return;
    case Op::pow:
      print_atom(e.lhs(), out);
      out += '^';
      out += std::to_string(e.exponent());
      return;
    case Op::neg:
      out += '-';
      // "-2" would read back as the constant -2, not neg(2)
      if (e.lhs().op() == Op::constant) {
        out += '(';
        print(e.lhs(), out);
        out += ')';
      } else {
        print_atom(e.lhs(), out);
      }
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      static constexpr char symbol[] = {'+', '-', '*', '/'};
      out += '(';
      print(e.lhs(), out);
      out += ' ';
      out += symbol[static_cast<int>(e.op()) - static_cast<int>(Op::add)];
      out += ' ';
      print(e.rhs(), out);
      out += ')';
      return;
    }
    default:
      out += function_name(e.op());
      out += '(';
      print(e.lhs(), out);
      out += ')';
  }
}

}  // namespace detail

/// Fully parenthesized text; `parse(to_string(e)) == e` for parsed trees.
inline std::string to_string(const Expression& e) {
  std::string out;
  detail::print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression run() {
    Expression e = expression();
    skip();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }

  void skip() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  static bool digit(char c) { return c >= '0' && c <= '9'; }
  static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool ident_char(char c) { return ident_start(c) || digit(c); }

  Expression expression() {
    Expression e = term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        e = e + term();
      } else if (peek('-')) {
        ++pos_;
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expression term() {
    Expression e = factor();
    while (true) {
      if (peek('*')) {
        ++pos_;
        e = e * factor();
      } else if (peek('/')) {
        ++pos_;
        e = e / factor();
      } else {
        return e;
      }
    }
  }

  Expression factor() {
    Expression base = atom();
    if (!peek('^')) return base;
    ++pos_;
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && digit(text_[pos_])) ++pos_;
    if (start == pos_) {
      pos_ = start;
      fail("expected a non-negative integer exponent");
    }
    int n = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, n);
    if (ec != std::errc()) {
      pos_ = start;
      fail("exponent out of range");
    }
    return pow(base, n);
  }

  Expression atom() {
    skip();
    if (pos_ >= text_.size()) fail("expected an operand");
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      if (pos_ < text_.size() && (digit(text_[pos_]) || text_[pos_] == '.')) {
        Expression v = number();
        return num(-v.constant_value());
      }
      return -atom();
    }
    if (c == '(') {
      ++pos_;
      Expression e = expression();
      if (!peek(')')) fail("expected ')'");
      ++pos_;
      return e;
    }
    if (digit(c) || c == '.') return number();
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      if (!peek('(')) return var(std::move(name));
      Op op;
      if (name == "sin") op = Op::sin;
      else if (name == "cos") op = Op::cos;
      else if (name == "exp") op = Op::exp;
      else if (name == "ln") op = Op::ln;
      else if (name == "sqrt") op = Op::sqrt;
      else if (name == "neg") op = Op::neg;
      else throw ParseError("unknown function '" + name + "'", start);
      ++pos_;
      Expression arg = expression();
      if (!peek(')')) fail("expected ')'");
      ++pos_;
      return Expression::unary(op, arg);
    }
    fail("expected an operand");
  }

  Expression number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && digit(text_[pos_])) ++pos_;
    }
    if (pos_ - start == 1 && text_[start] == '.') {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
      if (q < text_.size() && digit(text_[q])) {
        while (q < text_.size() && digit(text_[q])) ++q;
        pos_ = q;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || !std::isfinite(v)) {
      pos_ = start;
      fail("number out of range");
    }
    return num(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text`; throws ParseError carrying the byte offset of the problem.
inline Expression parse(std::string_view text) { return detail::Parser(text).run(); }

// ---------------------------------------------------------------------------
// Structural utilities

inline void collect_variables(const Expression& e, std::set<std::string>& out) {
  switch (e.op()) {
    case Op::constant: return;
    case Op::variable: out.insert(e.name()); return;
    default:
      collect_variables(e.lhs(), out);
      if (is_binary(e.op())) collect_variables(e.rhs(), out);
  }
}

inline std::set<std::string> free_variables(const Expression& e) {
  std::set<std::string> out;
  collect_variables(e, out);
  return out;
}

/// Replaces every variable named in `with` by the mapped expression.
inline Expression substitute(const Expression& e, const std::map<std::string, Expression>& with) {
  switch (e.op()) {
    case Op::constant: return e;
    case Op::variable: {
      auto it = with.find(e.name());
      return it == with.end() ? e : it->second;
    }
    case Op::pow: return pow(substitute(e.lhs(), with), e.exponent());
    default:
      if (is_binary(e.op())) return Expression::binary(e.op(), substitute(e.lhs(), with), substitute(e.rhs(), with));
      return Expression::unary(e.op(), substitute(e.lhs(), with));
  }
}

// ---------------------------------------------------------------------------
// Evaluation

using Binding = std::map<std::string, double, std::less<>>;

enum class Fault { unbound_variable, non_finite };

struct EvalFault {
  Fault kind;
  std::string message;
};

/// Result of an evaluation: a value or a fault. Faults are ordinary values so
/// callers can probe near singularities.
template <class T>
class Evaluated {
 public:
  Evaluated(T value) : v_(std::move(value)) {}
  Evaluated(EvalFault fault) : v_(std::move(fault)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const {
    if (!ok()) throw EvaluationError(fault().message);
    return std::get<0>(v_);
  }
  T& value() {
    if (!ok()) throw EvaluationError(fault().message);
    return std::get<0>(v_);
  }
  const EvalFault& fault() const { return std::get<1>(v_); }

 private:
  std::variant<T, EvalFault> v_;
};

/// Value, gradient and (symmetric) Hessian with respect to a variable list.
struct Jet {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// u^n by repeated squaring; shared by the value and jet paths so both agree
/// bit for bit.
inline double ipow(double u, int n) {
  double result = 1.0;
  double base = u;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

/// An expression resolved against an ordered variable list and flattened to
/// postfix form. Named constants are folded in at compile time.
class Compiled {
 public:
  Compiled() = default;

  Compiled(const Expression& e, std::span<const std::string> variables, const Binding& constants = {}) {
    emit(e, variables, constants);
    arity_ = variables.size();
    std::size_t depth = 0;
    for (const auto& ins : code_) {
      if (ins.op == Op::constant || ins.op == Op::variable) ++depth;
      else if (is_binary(ins.op)) --depth;
      depth_ = std::max(depth_, depth);
    }
  }

  std::size_t arity() const { return arity_; }
  const std::vector<std::string>& unbound() const { return unbound_; }

  Evaluated<double> eval(std::span<const double> values) const {
    if (!unbound_.empty()) return unbound_fault();
    std::vector<double> stack;
    stack.reserve(depth_);
    for (const auto& ins : code_) {
      double r = 0.0;
      switch (ins.op) {
        case Op::constant: stack.push_back(ins.value); continue;
        case Op::variable: stack.push_back(values[ins.slot]); continue;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
          const double b = stack.back();
          stack.pop_back();
          const double a = stack.back();
          r = ins.op == Op::add ? a + b : ins.op == Op::sub ? a - b : ins.op == Op::mul ? a * b : a / b;
          break;
        }
        default: {
          const double u = stack.back();
          stack.pop_back();
          if (auto f = domain_fault(ins.op, u)) return *f;
          r = apply(ins, u);
        }
      }
      if (!std::isfinite(r)) return non_finite(ins.op);
      if (is_binary(ins.op)) stack.back() = r;
      else stack.push_back(r);
    }
    return stack.back();
  }

  /// Forward-mode second-order jet. `wrt` lists variable slots; gradient and
  /// Hessian are ordered like `wrt`. With `hessian == false` only the
  /// gradient is propagated.
  Evaluated<Jet> jet(std::span<const double> values, std::span<const int> wrt, bool hessian = true) const {
    if (!unbound_.empty()) return unbound_fault();
    const int k = static_cast<int>(wrt.size());
    const int nh = hessian ? k * (k + 1) / 2 : 0;
    const int rec = 1 + k + nh;
    std::vector<int> seed(arity_, -1);
    for (int i = 0; i < k; ++i) seed[wrt[i]] = i;

    std::vector<double> buf(static_cast<std::size_t>(rec) * (depth_ + 1), 0.0);
    double* scratch = buf.data() + static_cast<std::size_t>(rec) * depth_;
    std::size_t top = 0;  // number of records on the stack
    auto at = [&](std::size_t i) { return buf.data() + static_cast<std::size_t>(rec) * i; };

    for (const auto& ins : code_) {
      if (ins.op == Op::constant || ins.op == Op::variable) {
        double* r = at(top++);
        std::fill(r, r + rec, 0.0);
        if (ins.op == Op::constant) {
          r[0] = ins.value;
        } else {
          r[0] = values[ins.slot];
          if (seed[ins.slot] >= 0) r[1 + seed[ins.slot]] = 1.0;
        }
        continue;
      }
      if (is_binary(ins.op)) {
        double* b = at(--top);
        double* a = at(top - 1);
        binary_jet(ins.op, a, b, scratch, k, hessian);
        if (!std::isfinite(a[0])) return non_finite(ins.op);
        continue;
      }
      double* a = at(top - 1);
      if (auto f = domain_fault(ins.op, a[0])) return *f;
      double f0, f1, f2;
      derivatives(ins, a[0], f0, f1, f2);
      if (!std::isfinite(f0)) return non_finite(ins.op);
      if (hessian) {
        double* h = a + 1 + k;
        for (int i = 0, idx = 0; i < k; ++i)
          for (int j = i; j < k; ++j, ++idx) h[idx] = f1 * h[idx] + f2 * a[1 + i] * a[1 + j];
      }
      for (int i = 0; i < k; ++i) a[1 + i] *= f1;
      a[0] = f0;
    }

    const double* r = at(0);
    Jet out;
    out.value = r[0];
    out.gradient = Eigen::Map<const Eigen::VectorXd>(r + 1, k);
    if (hessian) {
      out.hessian.resize(k, k);
      for (int i = 0, idx = 0; i < k; ++i)
        for (int j = i; j < k; ++j, ++idx) out.hessian(i, j) = out.hessian(j, i) = r[1 + k + idx];
    }
    if (!out.gradient.allFinite() || (hessian && !out.hessian.allFinite()))
      return EvalFault{Fault::non_finite, "evaluation fault: non-finite derivative"};
    return out;
  }

 private:
  struct Instr {
    Op op;
    int slot = -1;
    double value = 0.0;
    int exponent = 0;
  };

  void emit(const Expression& e, std::span<const std::string> variables, const Binding& constants) {
    switch (e.op()) {
      case Op::constant: code_.push_back({Op::constant, -1, e.constant_value(), 0}); return;
      case Op::variable: {
        auto it = std::find(variables.begin(), variables.end(), e.name());
        if (it != variables.end()) {
          code_.push_back({Op::variable, static_cast<int>(it - variables.begin()), 0.0, 0});
        } else if (auto c = constants.find(e.name()); c != constants.end()) {
          code_.push_back({Op::constant, -1, c->second, 0});
        } else {
          if (std::find(unbound_.begin(), unbound_.end(), e.name()) == unbound_.end()) unbound_.push_back(e.name());
          code_.push_back({Op::constant, -1, 0.0, 0});
        }
        return;
      }
      case Op::pow:
        emit(e.lhs(), variables, constants);
        code_.push_back({Op::pow, -1, 0.0, e.exponent()});
        return;
      default:
        emit(e.lhs(), variables, constants);
        if (is_binary(e.op())) emit(e.rhs(), variables, constants);
        code_.push_back({e.op(), -1, 0.0, 0});
    }
  }

  EvalFault unbound_fault() const {
    return {Fault::unbound_variable, "evaluation fault: unbound variable '" + unbound_.front() + "'"};
  }
  static EvalFault non_finite(Op op) {
    std::string what = is_binary(op) ? (op == Op::div ? "division" : "arithmetic") : std::string(function_name(op));
    if (op == Op::pow) what = "power";
    return {Fault::non_finite, "evaluation fault: non-finite result in " + what};
  }
  static std::optional<EvalFault> domain_fault(Op op, double u) {
    if (op == Op::ln && !(u > 0.0)) return EvalFault{Fault::non_finite, "evaluation fault: ln of non-positive value"};
    if (op == Op::sqrt && !(u >= 0.0)) return EvalFault{Fault::non_finite, "evaluation fault: sqrt of negative value"};
    return std::nullopt;
  }

  static double apply(const Instr& ins, double u) {
    switch (ins.op) {
      case Op::pow: return ipow(u, ins.exponent);
      case Op::neg: return -u;
      case Op::sin: return std::sin(u);
      case Op::cos: return std::cos(u);
      case Op::exp: return std::exp(u);
      case Op::ln: return std::log(u);
      case Op::sqrt: return std::sqrt(u);
      default: return u;
    }
  }

  static void derivatives(const Instr& ins, double u, double& f0, double& f1, double& f2) {
    f0 = apply(ins, u);
    switch (ins.op) {
      case Op::pow: {
        const int n = ins.exponent;
        f1 = n == 0 ? 0.0 : n * ipow(u, n - 1);
        f2 = n < 2 ? 0.0 : n * (n - 1) * ipow(u, n - 2);
        return;
      }
      case Op::neg: f1 = -1.0; f2 = 0.0; return;
      case Op::sin: f1 = std::cos(u); f2 = -f0; return;
      case Op::cos: f1 = -std::sin(u); f2 = -f0; return;
      case Op::exp: f1 = f0; f2 = f0; return;
      case Op::ln: f1 = 1.0 / u; f2 = -1.0 / (u * u); return;
      case Op::sqrt: f1 = 0.5 / f0; f2 = -0.25 / (f0 * u); return;
      default: f1 = 1.0; f2 = 0.0;
    }
  }

  // a <- a (op) b, records laid out as [value, gradient, packed upper Hessian].
  static void binary_jet(Op op, double* a, const double* b, double* tmp, int k, bool hessian) {
    const double va = a[0], vb = b[0];
    const double* ga = a + 1;
    const double* gb = b + 1;
    double* ha = a + 1 + k;
    const double* hb = b + 1 + k;
    const int nh = hessian ? k * (k + 1) / 2 : 0;
    switch (op) {
      case Op::add:
        for (int i = 0; i < k + nh; ++i) a[1 + i] += b[1 + i];
        a[0] = va + vb;
        return;
      case Op::sub:
        for (int i = 0; i < k + nh; ++i) a[1 + i] -= b[1 + i];
        a[0] = va - vb;
        return;
      case Op::mul: {
        if (hessian) {
          for (int i = 0, idx = 0; i < k; ++i)
            for (int j = i; j < k; ++j, ++idx)
              ha[idx] = va * hb[idx] + vb * ha[idx] + ga[i] * gb[j] + ga[j] * gb[i];
        }
        for (int i = 0; i < k; ++i) a[1 + i] = va * gb[i] + vb * ga[i];
        a[0] = va * vb;
        return;
      }
      default: {
        const double q = va / vb;
        for (int i = 0; i < k; ++i) tmp[i] = (ga[i] - q * gb[i]) / vb;
        if (hessian) {
          for (int i = 0, idx = 0; i < k; ++i)
            for (int j = i; j < k; ++j, ++idx)
              ha[idx] = (ha[idx] - tmp[i] * gb[j] - tmp[j] * gb[i] - q * hb[idx]) / vb;
        }
        for (int i = 0; i < k; ++i) a[1 + i] = tmp[i];
        a[0] = va / vb;
      }
    }
  }

  std::vector<Instr> code_;
  std::vector<std::string> unbound_;
  std::size_t arity_ = 0;
  std::size_t depth_ = 0;
};

namespace detail {
inline std::vector<std::string> binding_names(const Binding& b) {
  std::vector<std::string> names;
  names.reserve(b.size());
  for (const auto& [name, value] : b) names.push_back(name);
  return names;
}
inline std::vector<double> binding_values(const Binding& b) {
  std::vector<double> values;
  values.reserve(b.size());
  for (const auto& [name, value] : b) values.push_back(value);
  return values;
}
}  // namespace detail

inline Evaluated<double> eval(const Expression& e, const Binding& b) {
  const auto names = detail::binding_names(b);
  return Compiled(e, names).eval(detail::binding_values(b));
}

/// Value, gradient and Hessian of `e` at `b` with respect to `wrt`.
inline Evaluated<Jet> eval_jet2(const Expression& e, const Binding& b, const std::vector<std::string>& wrt) {
  const auto names = detail::binding_names(b);
  std::vector<int> slots;
  for (const auto& w : wrt) {
    auto it = std::find(names.begin(), names.end(), w);
    if (it == names.end()) return EvalFault{Fault::unbound_variable, "evaluation fault: unbound variable '" + w + "'"};
    slots.push_back(static_cast<int>(it - names.begin()));
  }
  return Compiled(e, names).jet(detail::binding_values(b), slots, true);
}

}  // namespace algmech::expr
