#include "qms/expr.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

#include "qms/error.hpp"

namespace qms {

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw ParameterError("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n, d);
  num = g ? n / g : n;
  den = g ? d / g : d;
}

Rational operator-(Rational a, Rational b) {
  return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
}

std::optional<Rational> Rational::from_double(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) return std::nullopt;
  // Continued-fraction convergents.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(rest);
    if (std::abs(a) > 9.0e15) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h2 = ai * h1 + h0;
    const std::int64_t k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double approx = static_cast<double>(h1) / static_cast<double>(k1);
    if (std::abs(approx - x) <= 1e-12 * std::max(1.0, std::abs(x))) return Rational(h1, k1);
    const double frac = rest - a;
    if (frac == 0.0) break;
    rest = 1.0 / frac;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Nodes

enum class Kind { constant, variable, parameter, function, negate, add, sub, mul, div, power };

struct Expr::Node {
  Kind kind = Kind::constant;
  double value = 0.0;
  std::string name;
  Func fn = Func::sin;
  Rational exponent;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

struct ExprAccess {
  static Expr wrap(std::shared_ptr<const Expr::Node> n) { return Expr(std::move(n)); }
  static const std::shared_ptr<const Expr::Node>& ptr(const Expr& e) { return e.node_; }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Node n) { return std::make_shared<const Expr::Node>(std::move(n)); }

std::optional<double> const_of(const NodePtr& n) {
  if (n->kind == Kind::constant) return n->value;
  return std::nullopt;
}

const char* func_name(Func fn) {
  switch (fn) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::exp: return "exp";
    case Func::ln: return "ln";
    case Func::sqrt: return "sqrt";
    case Func::abs: return "abs";
  }
  return "?";
}

std::optional<Func> func_from_name(std::string_view s) {
  static constexpr std::pair<std::string_view, Func> table[] = {
      {"sin", Func::sin}, {"cos", Func::cos}, {"tan", Func::tan},   {"exp", Func::exp},
      {"ln", Func::ln},   {"sqrt", Func::sqrt}, {"abs", Func::abs}};
  for (const auto& [n, f] : table)
    if (n == s) return f;
  return std::nullopt;
}

// Raw evaluation helpers; return NaN on a domain violation so that folding
// can decline to fold and the evaluator can report the node.
double apply_func(Func fn, double x) {
  switch (fn) {
    case Func::sin: return std::sin(x);
    case Func::cos: return std::cos(x);
    case Func::tan: return std::tan(x);
    case Func::exp: return std::exp(x);
    case Func::ln: return x > 0.0 ? std::log(x) : std::nan("");
    case Func::sqrt: return x >= 0.0 ? std::sqrt(x) : std::nan("");
    case Func::abs: return std::abs(x);
  }
  return std::nan("");
}

double apply_power(double base, Rational e) {
  if (base == 0.0 && e.num < 0) return std::nan("");
  if (e.is_integer()) return std::pow(base, static_cast<double>(e.num));
  if (base < 0.0) {
    if (e.den % 2 == 0) return std::nan("");
    const double m = std::pow(-base, e.value());
    return (e.num % 2 == 0) ? m : -m;
  }
  return std::pow(base, e.value());
}

NodePtr fold_constant(double v) { return make({.kind = Kind::constant, .value = v}); }

NodePtr build_negate(const NodePtr& x) {
  if (auto c = const_of(x)) return fold_constant(-*c);
  if (x->kind == Kind::negate) return x->a;
  return make({.kind = Kind::negate, .a = x});
}

NodePtr build_binary(Kind k, const NodePtr& x, const NodePtr& y) {
  const auto cx = const_of(x);
  const auto cy = const_of(y);
  switch (k) {
    case Kind::add:
      if (cx && cy) return fold_constant(*cx + *cy);
      if (cx && *cx == 0.0) return y;
      if (cy && *cy == 0.0) return x;
      break;
    case Kind::sub:
      if (cx && cy) return fold_constant(*cx - *cy);
      if (cy && *cy == 0.0) return x;
      if (cx && *cx == 0.0) return build_negate(y);
      break;
    case Kind::mul:
      if (cx && cy) return fold_constant(*cx * *cy);
      if ((cx && *cx == 0.0) || (cy && *cy == 0.0)) return fold_constant(0.0);
      if (cx && *cx == 1.0) return y;
      if (cy && *cy == 1.0) return x;
      if (cx && *cx == -1.0) return build_negate(y);
      if (cy && *cy == -1.0) return build_negate(x);
      break;
    case Kind::div:
      if (cx && cy && *cy != 0.0) return fold_constant(*cx / *cy);
      if (cy && *cy == 1.0) return x;
      if (cx && *cx == 0.0 && !(cy && *cy == 0.0)) return fold_constant(0.0);
      break;
    default:
      break;
  }
  return make({.kind = k, .a = x, .b = y});
}

NodePtr build_function(Func fn, const NodePtr& x) {
  if (auto c = const_of(x)) {
    const double v = apply_func(fn, *c);
    if (std::isfinite(v)) return fold_constant(v);
  }
  return make({.kind = Kind::function, .fn = fn, .a = x});
}

NodePtr build_power(const NodePtr& x, Rational e) {
  if (e.num == 0) return fold_constant(1.0);
  if (e == Rational(1)) return x;
  if (auto c = const_of(x)) {
    const double v = apply_power(*c, e);
    if (std::isfinite(v)) return fold_constant(v);
  }
  return make({.kind = Kind::power, .exponent = e, .a = x});
}

// ---------------------------------------------------------------------------
// Printing

int precedence(const Expr::Node& n) {
  switch (n.kind) {
    case Kind::add:
    case Kind::sub: return 1;
    case Kind::mul:
    case Kind::div: return 2;
    case Kind::negate: return 3;
    case Kind::power: return 4;
    case Kind::constant: return n.value < 0.0 ? 0 : 5;
    default: return 5;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void print(const Expr::Node& n, std::string& out);

void print_child(const Expr::Node& child, int min_prec, std::string& out) {
  const bool paren = precedence(child) < min_prec;
  if (paren) out += '(';
  print(child, out);
  if (paren) out += ')';
}

void print(const Expr::Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::constant:
      out += format_double(n.value);
      return;
    case Kind::variable:
      out += 'r';
      return;
    case Kind::parameter:
      out += n.name;
      return;
    case Kind::function:
      out += func_name(n.fn);
      out += '(';
      print(*n.a, out);
      out += ')';
      return;
    case Kind::negate:
      out += '-';
      print_child(*n.a, 3, out);
      return;
    case Kind::power:
      print_child(*n.a, 5, out);
      out += '^';
      if (n.exponent.is_integer() && n.exponent.num >= 0) {
        out += std::to_string(n.exponent.num);
      } else {
        out += '(' + std::to_string(n.exponent.num);
        if (!n.exponent.is_integer()) out += '/' + std::to_string(n.exponent.den);
        out += ')';
      }
      return;
    default: {
      const int p = precedence(n);
      const char op = n.kind == Kind::add   ? '+'
                      : n.kind == Kind::sub ? '-'
                      : n.kind == Kind::mul ? '*'
                                            : '/';
      print_child(*n.a, p, out);
      out += op;
      // Right operand in parentheses at equal precedence keeps the tree shape
      // exact under re-parsing.
      print_child(*n.b, p + 1, out);
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

double eval(const Expr::Node& n, double r, const Bindings& bindings);

[[noreturn]] void domain_fail(const Expr::Node& n, const std::string& why) {
  std::string text;
  print(n, text);
  throw DomainError(why + " in '" + text + "'");
}

double eval(const Expr::Node& n, double r, const Bindings& bindings) {
  switch (n.kind) {
    case Kind::constant: return n.value;
    case Kind::variable: return r;
    case Kind::parameter: {
      auto it = bindings.find(n.name);
      if (it == bindings.end()) throw Error("unbound parameter '" + n.name + "'");
      return it->second;
    }
    case Kind::function: {
      const double x = eval(*n.a, r, bindings);
      if (n.fn == Func::ln && !(x > 0.0))
        domain_fail(n, "ln of non-positive argument " + format_double(x));
      if (n.fn == Func::sqrt && !(x >= 0.0))
        domain_fail(n, "sqrt of negative argument " + format_double(x));
      const double v = apply_func(n.fn, x);
      if (!std::isfinite(v)) domain_fail(n, "non-finite value");
      return v;
    }
    case Kind::negate: return -eval(*n.a, r, bindings);
    case Kind::add: return eval(*n.a, r, bindings) + eval(*n.b, r, bindings);
    case Kind::sub: return eval(*n.a, r, bindings) - eval(*n.b, r, bindings);
    case Kind::mul: return eval(*n.a, r, bindings) * eval(*n.b, r, bindings);
    case Kind::div: {
      const double num = eval(*n.a, r, bindings);
      const double den = eval(*n.b, r, bindings);
      if (den == 0.0) domain_fail(n, "division by zero");
      const double v = num / den;
      if (!std::isfinite(v)) domain_fail(n, "non-finite value");
      return v;
    }
    case Kind::power: {
      const double x = eval(*n.a, r, bindings);
      const double v = apply_power(x, n.exponent);
      if (!std::isfinite(v)) domain_fail(n, "power outside its domain at base " + format_double(x));
      return v;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Differentiation

NodePtr derive(const NodePtr& n) {
  const auto cst = [](double v) { return fold_constant(v); };
  switch (n->kind) {
    case Kind::constant:
    case Kind::parameter: return cst(0.0);
    case Kind::variable: return cst(1.0);
    case Kind::negate: return build_negate(derive(n->a));
    case Kind::add: return build_binary(Kind::add, derive(n->a), derive(n->b));
    case Kind::sub: return build_binary(Kind::sub, derive(n->a), derive(n->b));
    case Kind::mul:
      return build_binary(Kind::add, build_binary(Kind::mul, derive(n->a), n->b),
                          build_binary(Kind::mul, n->a, derive(n->b)));
    case Kind::div: {
      // (u/v)' = u'/v - u v'/v^2
      const auto du = derive(n->a);
      const auto dv = derive(n->b);
      return build_binary(
          Kind::sub, build_binary(Kind::div, du, n->b),
          build_binary(Kind::div, build_binary(Kind::mul, n->a, dv), build_power(n->b, Rational(2))));
    }
    case Kind::power: {
      const Rational e = n->exponent;
      const auto outer = build_binary(Kind::mul, cst(e.value()), build_power(n->a, e - Rational(1)));
      return build_binary(Kind::mul, outer, derive(n->a));
    }
    case Kind::function: {
      const auto& u = n->a;
      NodePtr outer;
      switch (n->fn) {
        case Func::sin: outer = build_function(Func::cos, u); break;
        case Func::cos: outer = build_negate(build_function(Func::sin, u)); break;
        case Func::tan: outer = build_power(build_function(Func::cos, u), Rational(-2)); break;
        case Func::exp: outer = n; break;
        case Func::ln: outer = build_power(u, Rational(-1)); break;
        case Func::sqrt: outer = build_binary(Kind::div, cst(0.5), n); break;
        case Func::abs: outer = build_binary(Kind::div, u, n); break;
      }
      return build_binary(Kind::mul, outer, derive(u));
    }
  }
  return cst(0.0);
}

NodePtr rebind(const NodePtr& n, const Bindings& bindings) {
  switch (n->kind) {
    case Kind::constant:
    case Kind::variable: return n;
    case Kind::parameter: {
      auto it = bindings.find(n->name);
      return it == bindings.end() ? n : fold_constant(it->second);
    }
    case Kind::function: return build_function(n->fn, rebind(n->a, bindings));
    case Kind::negate: return build_negate(rebind(n->a, bindings));
    case Kind::power: return build_power(rebind(n->a, bindings), n->exponent);
    default: return build_binary(n->kind, rebind(n->a, bindings), rebind(n->b, bindings));
  }
}

void collect_parameters(const Expr::Node& n, std::set<std::string>& out) {
  if (n.kind == Kind::parameter) out.insert(n.name);
  if (n.a) collect_parameters(*n.a, out);
  if (n.b) collect_parameters(*n.b, out);
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view src, const std::set<std::string>& params) : src_(src), params_(params) {}

  NodePtr parse_all() {
    auto e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view src_;
  const std::set<std::string>& params_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = build_binary(Kind::add, lhs, parse_product());
      else if (accept('-'))
        lhs = build_binary(Kind::sub, lhs, parse_product());
      else
        return lhs;
    }
  }

  NodePtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = build_binary(Kind::mul, lhs, parse_unary());
      else if (accept('/'))
        lhs = build_binary(Kind::div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return build_negate(parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    skip_ws();
    if (!accept('^')) return base;
    const std::size_t exp_pos = pos_;
    auto exponent = parse_unary();
    auto value = const_of(exponent);
    if (!value) throw ParseError("non-constant exponent", exp_pos);
    auto rat = Rational::from_double(*value);
    if (!rat) throw ParseError("exponent is not a rational constant", exp_pos);
    return build_power(base, *rat);
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double v = 0.0;
    const auto text = src_.substr(start, pos_ - start);
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw ParseError("malformed number", start);
    return fold_constant(v);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    if (auto fn = func_from_name(name)) {
      if (!accept('(')) fail("expected '(' after " + name);
      auto arg = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return build_function(*fn, arg);
    }
    if (name == "r") return make({.kind = Kind::variable});
    if (name == "pi") return fold_constant(std::numbers::pi);
    if (params_.count(name)) return make({.kind = Kind::parameter, .name = name});
    throw ParseError("unknown identifier '" + name + "'", start);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() : node_(fold_constant(0.0)) {}

Expr Expr::constant(double value) { return Expr(fold_constant(value)); }
Expr Expr::variable() { return Expr(make({.kind = Kind::variable})); }
Expr Expr::parameter(std::string name) {
  return Expr(make({.kind = Kind::parameter, .name = std::move(name)}));
}
Expr Expr::apply(Func fn, const Expr& arg) { return Expr(build_function(fn, arg.node_)); }
Expr Expr::power(const Expr& base, Rational exponent) { return Expr(build_power(base.node_, exponent)); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(build_binary(Kind::add, a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(build_binary(Kind::sub, a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(build_binary(Kind::mul, a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(build_binary(Kind::div, a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(build_negate(a.node_)); }

double Expr::evaluate(double r, const Bindings& bindings) const {
  if (!(r > 0.0)) throw DomainError("evaluation requires r > 0, got " + format_double(r));
  return eval(*node_, r, bindings);
}

Expr Expr::derivative() const { return Expr(derive(node_)); }

Expr Expr::bind(const Bindings& bindings) const { return Expr(rebind(node_, bindings)); }

std::string Expr::to_string() const {
  std::string out;
  print(*node_, out);
  return out;
}

std::optional<double> Expr::constant_value() const { return const_of(node_); }

std::set<std::string> Expr::parameters() const {
  std::set<std::string> out;
  collect_parameters(*node_, out);
  return out;
}

Expr parse(std::string_view source, const std::set<std::string>& params) {
  for (const auto& p : params)
    if (p == "r" || p == "pi" || func_from_name(p))
      throw ParseError("parameter name '" + p + "' is reserved", 0);
  Parser parser(source, params);
  return ExprAccess::wrap(parser.parse_all());
}

}  // namespace qms
