#pragma once

// Closed-form scalar expressions: parse, print, evaluate, differentiate.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gqe/error.hpp"

namespace gqe {

enum class Op : std::uint8_t {
  constant, variable,
  add, sub, mul, div, pow, neg,
  sin, cos, tan, sinh, cosh, tanh, exp, ln, arctan, sqrt, abs,
};

namespace detail {

struct Node {
  Op op;
  double value = 0.0;
  std::string name;
  std::shared_ptr<const Node> a, b;
};

inline constexpr std::array<std::pair<std::string_view, Op>, 11> kFunctions{{
    {"sin", Op::sin}, {"cos", Op::cos}, {"tan", Op::tan}, {"sinh", Op::sinh},
    {"cosh", Op::cosh}, {"tanh", Op::tanh}, {"exp", Op::exp}, {"ln", Op::ln},
    {"arctan", Op::arctan}, {"sqrt", Op::sqrt}, {"abs", Op::abs},
}};

inline bool is_function_name(std::string_view s, Op* out = nullptr) {
  for (const auto& [name, op] : kFunctions)
    if (name == s) {
      if (out) *out = op;
      return true;
    }
  return false;
}

inline std::string_view function_name(Op op) {
  for (const auto& [name, o] : kFunctions)
    if (o == op) return name;
  return "?";
}

inline bool is_unary_function(Op op) { return op >= Op::sin; }

inline std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace detail

class Expr {
 public:
  Expr() : Expr(0.0) {}
  Expr(double c) {  // NOLINT: implicit on purpose, constants mix freely with expressions
    auto n = std::make_shared<detail::Node>();
    n->op = Op::constant;
    n->value = c;
    n_ = std::move(n);
  }
  Expr(int c) : Expr(static_cast<double>(c)) {}

  static Expr variable(std::string name) {
    auto n = std::make_shared<detail::Node>();
    n->op = Op::variable;
    n->name = std::move(name);
    return Expr(std::move(n));
  }

  // Builders apply light constant folding only.
  static Expr binary(Op op, const Expr& a, const Expr& b);
  static Expr unary(Op op, const Expr& a);

  Op op() const { return n_->op; }
  double constant_value() const { return n_->value; }
  const std::string& name() const { return n_->name; }
  Expr lhs() const { return Expr(n_->a); }
  Expr rhs() const { return Expr(n_->b); }
  bool is_constant() const { return n_->op == Op::constant; }
  bool is_constant(double c) const { return is_constant() && n_->value == c; }
  const detail::Node* node() const { return n_.get(); }

  std::string str() const {
    std::string out;
    print(n_.get(), out);
    return out;
  }

  std::set<std::string> free_variables() const {
    std::set<std::string> out;
    collect(n_.get(), out);
    return out;
  }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> n) : n_(std::move(n)) {}

  static void print(const detail::Node* n, std::string& out) {
    switch (n->op) {
      case Op::constant:
        if (std::signbit(n->value)) {
          out += "(-";
          out += detail::format_number(-n->value);
          out += ")";
        } else {
          out += detail::format_number(n->value);
        }
        return;
      case Op::variable: out += n->name; return;
      case Op::neg:
        out += "(-";
        print(n->a.get(), out);
        out += ")";
        return;
      case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow: {
        static constexpr const char* sym[] = {" + ", " - ", " * ", " / ", "^"};
        out += "(";
        print(n->a.get(), out);
        out += sym[static_cast<int>(n->op) - static_cast<int>(Op::add)];
        print(n->b.get(), out);
        out += ")";
        return;
      }
      default:
        out += detail::function_name(n->op);
        out += "(";
        print(n->a.get(), out);
        out += ")";
        return;
    }
  }

  static void collect(const detail::Node* n, std::set<std::string>& out) {
    if (n->op == Op::variable) out.insert(n->name);
    if (n->a) collect(n->a.get(), out);
    if (n->b) collect(n->b.get(), out);
  }

  std::shared_ptr<const detail::Node> n_;
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::div, a, b); }
inline Expr operator-(const Expr& a) { return Expr::unary(Op::neg, a); }

// Function builders live in their own namespace so that unqualified math calls on
// doubles inside gqe never resolve to them.
namespace ex {
inline Expr var(std::string name) { return Expr::variable(std::move(name)); }
inline Expr pow(const Expr& a, const Expr& b) { return Expr::binary(Op::pow, a, b); }
inline Expr sin(const Expr& a) { return Expr::unary(Op::sin, a); }
inline Expr cos(const Expr& a) { return Expr::unary(Op::cos, a); }
inline Expr tan(const Expr& a) { return Expr::unary(Op::tan, a); }
inline Expr sinh(const Expr& a) { return Expr::unary(Op::sinh, a); }
inline Expr cosh(const Expr& a) { return Expr::unary(Op::cosh, a); }
inline Expr tanh(const Expr& a) { return Expr::unary(Op::tanh, a); }
inline Expr exp(const Expr& a) { return Expr::unary(Op::exp, a); }
inline Expr ln(const Expr& a) { return Expr::unary(Op::ln, a); }
inline Expr arctan(const Expr& a) { return Expr::unary(Op::arctan, a); }
inline Expr sqrt(const Expr& a) { return Expr::unary(Op::sqrt, a); }
inline Expr abs(const Expr& a) { return Expr::unary(Op::abs, a); }
}  // namespace ex

namespace detail {

// Applies one operation; returns false and fills msg on a domain violation.
inline bool apply_unary(Op op, double x, double& r, const char*& msg) {
  switch (op) {
    case Op::neg: r = -x; break;
    case Op::sin: r = std::sin(x); break;
    case Op::cos: r = std::cos(x); break;
    case Op::tan: r = std::tan(x); break;
    case Op::sinh: r = std::sinh(x); break;
    case Op::cosh: r = std::cosh(x); break;
    case Op::tanh: r = std::tanh(x); break;
    case Op::exp: r = std::exp(x); break;
    case Op::ln:
      if (!(x > 0.0)) { msg = "ln of non-positive value"; return false; }
      r = std::log(x);
      break;
    case Op::arctan: r = std::atan(x); break;
    case Op::sqrt:
      if (x < 0.0) { msg = "sqrt of negative value"; return false; }
      r = std::sqrt(x);
      break;
    case Op::abs: r = std::fabs(x); break;
    default: msg = "bad opcode"; return false;
  }
  if (!std::isfinite(r)) { msg = "non-finite result"; return false; }
  return true;
}

inline bool apply_binary(Op op, double x, double y, double& r, const char*& msg) {
  switch (op) {
    case Op::add: r = x + y; break;
    case Op::sub: r = x - y; break;
    case Op::mul: r = x * y; break;
    case Op::div:
      if (y == 0.0) { msg = "division by zero"; return false; }
      r = x / y;
      break;
    case Op::pow:
      if (x < 0.0 && y != std::nearbyint(y)) { msg = "negative base with non-integer exponent"; return false; }
      if (x == 0.0 && y < 0.0) { msg = "zero base with negative exponent"; return false; }
      r = std::pow(x, y);
      break;
    default: msg = "bad opcode"; return false;
  }
  if (!std::isfinite(r)) { msg = "non-finite result"; return false; }
  return true;
}

}  // namespace detail

inline Expr Expr::binary(Op op, const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    double r;
    const char* msg = nullptr;
    if (detail::apply_binary(op, a.constant_value(), b.constant_value(), r, msg)) return Expr(r);
  }
  switch (op) {
    case Op::add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      break;
    case Op::sub:
      if (b.is_constant(0.0)) return a;
      if (a.is_constant(0.0)) return -b;
      break;
    case Op::mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      break;
    case Op::div:
      if (b.is_constant(1.0)) return a;
      if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr(0.0);
      break;
    case Op::pow:
      if (b.is_constant(1.0)) return a;
      if (b.is_constant(0.0)) return Expr(1.0);
      break;
    default: break;
  }
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->a = a.n_;
  n->b = b.n_;
  return Expr(std::move(n));
}

inline Expr Expr::unary(Op op, const Expr& a) {
  if (a.is_constant()) {
    double r;
    const char* msg = nullptr;
    if (detail::apply_unary(op, a.constant_value(), r, msg)) return Expr(r);
  }
  if (op == Op::neg && a.op() == Op::neg) return a.lhs();
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->a = a.n_;
  return Expr(std::move(n));
}

// ---------------------------------------------------------------- parsing

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  Expr run() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError(Errc::syntax, "unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (peek('+')) { ++pos_; lhs = lhs + parse_product(); }
      else if (peek('-')) { ++pos_; lhs = lhs - parse_product(); }
      else return lhs;
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (peek('*')) { ++pos_; lhs = lhs * parse_unary(); }
      else if (peek('/')) { ++pos_; lhs = lhs / parse_unary(); }
      else return lhs;
    }
  }

  Expr parse_unary() {
    if (peek('-')) {
      ++pos_;
      return -parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (peek('^')) {
      ++pos_;
      return ex::pow(base, parse_unary());  // right associative, exponent may carry a sign
    }
    return base;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError(Errc::syntax, "unexpected end of input", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!peek(')')) throw ParseError(Errc::syntax, "expected ')'", pos_);
      ++pos_;
      return e;
    }
    if (digit(c) || c == '.') return parse_number();
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      std::string id(s_.substr(start, pos_ - start));
      Op fn = Op::constant;
      bool is_fn = is_function_name(id, &fn);
      if (peek('(')) {
        if (!is_fn) throw ParseError(Errc::unknown_identifier, "unknown function '" + id + "'", start);
        ++pos_;
        Expr arg = parse_sum();
        if (!peek(')')) throw ParseError(Errc::syntax, "expected ')'", pos_);
        ++pos_;
        return Expr::unary(fn, arg);
      }
      if (is_fn) throw ParseError(Errc::syntax, "function '" + id + "' needs an argument", start);
      for (const auto& v : vars_)
        if (v == id) return Expr::variable(id);
      if (id == "pi") return Expr(std::numbers::pi);
      throw ParseError(Errc::unknown_identifier, "unknown identifier '" + id + "'", start);
    }
    throw ParseError(Errc::syntax, "unexpected character '" + std::string(1, c) + "'", pos_);
  }

  Expr parse_number() {
    std::size_t start = pos_;
    bool digits = false;
    while (pos_ < s_.size() && digit(s_[pos_])) { ++pos_; digits = true; }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && digit(s_[pos_])) { ++pos_; digits = true; }
    }
    if (!digits) throw ParseError(Errc::syntax, "malformed number", start);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && digit(s_[pos_])) {
        while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_)
      throw ParseError(Errc::syntax, "malformed number", start);
    return Expr(value);
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view text, const std::vector<std::string>& vars) {
  if (vars.empty()) fail(Errc::invalid_argument, "parse needs at least one variable name");
  for (const auto& v : vars) {
    if (v.empty() || !(std::isalpha(static_cast<unsigned char>(v[0])) || v[0] == '_'))
      fail(Errc::invalid_argument, "bad variable name '" + v + "'");
    if (detail::is_function_name(v)) fail(Errc::invalid_argument, "variable name '" + v + "' is a function name");
  }
  return detail::Parser(text, vars).run();
}

// ---------------------------------------------------------------- calculus

inline Expr substitute(const Expr& e, const std::string& name, const Expr& value) {
  switch (e.op()) {
    case Op::constant: return e;
    case Op::variable: return e.name() == name ? value : e;
    case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow:
      return Expr::binary(e.op(), substitute(e.lhs(), name, value), substitute(e.rhs(), name, value));
    default: return Expr::unary(e.op(), substitute(e.lhs(), name, value));
  }
}

inline Expr differentiate(const Expr& e, const std::string& var) {
  using namespace ex;
  switch (e.op()) {
    case Op::constant: return Expr(0.0);
    case Op::variable: return Expr(e.name() == var ? 1.0 : 0.0);
    default: break;
  }
  const Expr a = e.lhs();
  const Expr da = differentiate(a, var);
  switch (e.op()) {
    case Op::add: return da + differentiate(e.rhs(), var);
    case Op::sub: return da - differentiate(e.rhs(), var);
    case Op::neg: return -da;
    case Op::mul: {
      const Expr b = e.rhs();
      return da * b + a * differentiate(b, var);
    }
    case Op::div: {
      const Expr b = e.rhs();
      const Expr db = differentiate(b, var);
      if (db.is_constant(0.0)) return da / b;
      return (da * b - a * db) / pow(b, 2.0);
    }
    case Op::pow: {
      const Expr b = e.rhs();
      const Expr db = differentiate(b, var);
      if (db.is_constant(0.0)) {
        if (da.is_constant(0.0)) return Expr(0.0);
        return b * pow(a, b - 1.0) * da;
      }
      if (da.is_constant(0.0)) return e * ln(a) * db;
      return e * (db * ln(a) + b * da / a);
    }
    case Op::sin: return cos(a) * da;
    case Op::cos: return -(sin(a) * da);
    case Op::tan: return da / pow(cos(a), 2.0);
    case Op::sinh: return cosh(a) * da;
    case Op::cosh: return sinh(a) * da;
    case Op::tanh: return da / pow(cosh(a), 2.0);
    case Op::exp: return e * da;
    case Op::ln: return da / a;
    case Op::arctan: return da / (1.0 + pow(a, 2.0));
    case Op::sqrt: return da / (2.0 * e);
    case Op::abs: return da * a / e;
    default: break;
  }
  fail(Errc::invalid_argument, "differentiate: bad node");
}

// ---------------------------------------------------------------- evaluation

// Expression compiled to postfix code over an ordered variable list.
class Program {
 public:
  Program() = default;
  Program(const Expr& e, std::vector<std::string> vars) : vars_(std::move(vars)) {
    std::size_t depth = 0;
    emit(e.node(), depth);
  }

  std::size_t arity() const { return vars_.size(); }
  const std::vector<std::string>& variables() const { return vars_; }
  bool empty() const { return code_.empty(); }

  Expected<double> evaluate(std::span<const double> x) const {
    double out;
    const char* msg = nullptr;
    if (run(x.data(), out, msg)) return out;
    return ErrorInfo{Errc::domain, msg};
  }

  double operator()(std::span<const double> x) const {
    double out;
    const char* msg = nullptr;
    if (!run(x.data(), out, msg)) fail(Errc::domain, msg);
    return out;
  }
  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }
  double operator()(double x, double y) const {
    const double p[2] = {x, y};
    return (*this)(std::span<const double>(p, 2));
  }

  bool try_eval(const double* x, double& out) const {
    const char* msg = nullptr;
    return run(x, out, msg);
  }

 private:
  struct Instr {
    Op op;
    int index;
    double value;
  };

  void emit(const detail::Node* n, std::size_t& depth) {
    switch (n->op) {
      case Op::constant:
        code_.push_back({Op::constant, 0, n->value});
        bump(depth, 1);
        return;
      case Op::variable: {
        int idx = -1;
        for (std::size_t i = 0; i < vars_.size(); ++i)
          if (vars_[i] == n->name) idx = static_cast<int>(i);
        if (idx < 0) fail(Errc::unbound_variable, "variable '" + n->name + "' is not bound");
        code_.push_back({Op::variable, idx, 0.0});
        bump(depth, 1);
        return;
      }
      case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow:
        emit(n->a.get(), depth);
        emit(n->b.get(), depth);
        code_.push_back({n->op, 0, 0.0});
        --depth;
        return;
      default:
        emit(n->a.get(), depth);
        code_.push_back({n->op, 0, 0.0});
        return;
    }
  }
  void bump(std::size_t& depth, std::size_t k) {
    depth += k;
    if (depth > max_depth_) max_depth_ = depth;
  }

  bool run(const double* x, double& out, const char*& msg) const {
    if (code_.empty()) {
      msg = "empty program";
      return false;
    }
    std::array<double, 64> small;
    std::vector<double> big;
    double* st = small.data();
    if (max_depth_ > small.size()) {
      big.resize(max_depth_);
      st = big.data();
    }
    std::size_t sp = 0;
    for (const Instr& in : code_) {
      switch (in.op) {
        case Op::constant: st[sp++] = in.value; break;
        case Op::variable: st[sp++] = x[in.index]; break;
        case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow: {
          double r;
          if (!detail::apply_binary(in.op, st[sp - 2], st[sp - 1], r, msg)) return false;
          st[sp - 2] = r;
          --sp;
          break;
        }
        default: {
          double r;
          if (!detail::apply_unary(in.op, st[sp - 1], r, msg)) return false;
          st[sp - 1] = r;
        }
      }
    }
    out = st[0];
    return true;
  }

  std::vector<std::string> vars_;
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

inline Expected<double> evaluate(const Expr& e, const std::map<std::string, double>& env) {
  std::vector<std::string> names;
  std::vector<double> values;
  for (const auto& v : e.free_variables()) {
    auto it = env.find(v);
    if (it == env.end()) return ErrorInfo{Errc::unbound_variable, "variable '" + v + "' is not bound"};
    names.push_back(v);
    values.push_back(it->second);
  }
  if (names.empty()) {
    names.push_back("_");
    values.push_back(0.0);
  }
  Program p(e, names);
  return p.evaluate(values);
}

// Convenience for single-variable expressions; throws on domain errors.
inline double eval_at(const Expr& e, const std::string& var, double x) {
  return evaluate(e, {{var, x}}).value();
}

}  // namespace gqe
