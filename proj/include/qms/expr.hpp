#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace qms {

/// Exact rational number with a positive denominator, always in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const { return den == 1; }

  /// Closest rational with denominator <= max_den that reproduces `x`
  /// to a relative 1e-12; nullopt if there is none.
  static std::optional<Rational> from_double(double x, std::int64_t max_den = 1000000);

  friend Rational operator-(Rational a, Rational b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
};

using Bindings = std::map<std::string, double, std::less<>>;

enum class Func { sin, cos, tan, exp, ln, sqrt, abs };

/// Immutable expression tree in the single variable `r` and named parameters.
///
/// Nodes are shared and never mutated after construction, so an Expr may be
/// evaluated concurrently from any number of threads. The builder functions
/// fold constants (and the 0/1 identities) but do no other simplification.
class Expr {
 public:
  struct Node;

  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr variable();
  static Expr parameter(std::string name);
  static Expr apply(Func fn, const Expr& arg);
  static Expr power(const Expr& base, Rational exponent);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  /// Evaluates at `r` > 0. Throws DomainError naming the offending
  /// sub-expression, or Error for an unbound parameter.
  double evaluate(double r, const Bindings& bindings = {}) const;

  /// Exact symbolic d/dr.
  Expr derivative() const;

  /// Replaces bound parameters by constants and re-folds.
  Expr bind(const Bindings& bindings) const;

  /// Parseable text; parse(to_string()) evaluates identically.
  std::string to_string() const;

  std::optional<double> constant_value() const;
  std::set<std::string> parameters() const;

  const Node& node() const { return *node_; }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend struct ExprAccess;
};

/// Parses `source` with the usual precedence: ^ binds tighter than unary
/// minus, which binds tighter than * and /, then + and -. Same-precedence
/// binary operators associate left. Exponents must fold to a rational
/// constant. Identifiers are `r`, `pi`, the functions sin cos tan exp ln
/// sqrt abs, and the names in `params`.
Expr parse(std::string_view source, const std::set<std::string>& params = {});

inline Expr differentiate(const Expr& e) { return e.derivative(); }

inline double evaluate(const Expr& e, double r, const Bindings& bindings = {}) {
  return e.evaluate(r, bindings);
}

inline Expr sqrt(const Expr& e) { return Expr::apply(Func::sqrt, e); }
inline Expr ln(const Expr& e) { return Expr::apply(Func::ln, e); }
inline Expr sin(const Expr& e) { return Expr::apply(Func::sin, e); }
inline Expr cos(const Expr& e) { return Expr::apply(Func::cos, e); }
inline Expr pow(const Expr& e, Rational k) { return Expr::power(e, k); }

}  // namespace qms
