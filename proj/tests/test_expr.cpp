#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qms/error.hpp"
#include "qms/expr.hpp"
#include "qms/rng.hpp"

using namespace qms;

namespace {

Expr random_expr(CounterRng& rng, int depth) {
  const auto pick = rng.next() % (depth <= 0 ? 2 : 9);
  switch (pick) {
    case 0:
      return Expr::variable();
    case 1:
      return Expr::constant(std::round(rng.uniform(-3.0, 3.0) * 4.0) / 4.0);
    case 2:
      return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 3:
      return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 4:
      return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 5:
      return random_expr(rng, depth - 1) / (Expr::constant(2.0) + Expr::variable() * Expr::variable());
    case 6: {
      static const Func fns[] = {Func::sin, Func::cos, Func::exp, Func::tan};
      return Expr::apply(fns[rng.next() % 4], random_expr(rng, depth - 1) / Expr::constant(4.0));
    }
    case 7: {
      static const Func fns[] = {Func::ln, Func::sqrt};
      return Expr::apply(fns[rng.next() % 2], Expr::constant(1.0) + random_expr(rng, depth - 1) * random_expr(rng, depth - 1));
    }
    default: {
      static const Rational ks[] = {Rational(2), Rational(3), Rational(-1), Rational(1, 2), Rational(-3, 2), Rational(2, 3)};
      return pow(Expr::variable() + random_expr(rng, depth - 1) * random_expr(rng, depth - 1), ks[rng.next() % 6]);
    }
  }
}

double central_difference(const Expr& e, double r, double h) {
  return (e.evaluate(r + h) - e.evaluate(r - h)) / (2 * h);
}

}  // namespace

TEST_CASE("parse follows precedence and associativity") {
  CHECK(parse("2+3*4").evaluate(1.0) == doctest::Approx(14.0));
  CHECK(parse("2^3^2").constant_value().has_value());
  CHECK(parse("-r^2").evaluate(3.0) == doctest::Approx(-9.0));
  CHECK(parse("8/4/2").evaluate(1.0) == doctest::Approx(1.0));
  CHECK(parse("10-4-3").evaluate(1.0) == doctest::Approx(3.0));
  CHECK(parse("sqrt(4*m/r+1)", {"m"}).evaluate(2.0, {{"m", 1.0}}) == doctest::Approx(std::sqrt(3.0)));
  CHECK(parse("pi").evaluate(1.0) == doctest::Approx(std::numbers::pi));
  CHECK(parse("r^(1/2)").evaluate(9.0) == doctest::Approx(3.0));
}

TEST_CASE("parse errors report their offset") {
  auto offset_of = [](const char* text) {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return static_cast<long>(e.offset());
    }
    return -1L;
  };
  CHECK(offset_of("r +") == 3);
  CHECK(offset_of("2 * (r") == 6);
  CHECK(offset_of("r $ 2") == 2);
  CHECK(offset_of("foo(r)") == 0);
  CHECK(offset_of("r^r") >= 0);
  CHECK(offset_of("") == 0);
}

TEST_CASE("unbound parameters and domain violations throw") {
  const Expr e = parse("a*r", {"a"});
  CHECK_THROWS_AS(e.evaluate(1.0), Error);
  CHECK(e.bind({{"a", 2.0}}).evaluate(3.0) == doctest::Approx(6.0));
  CHECK(e.parameters() == std::set<std::string>{"a"});
  CHECK_THROWS_AS(parse("ln(r-2)").evaluate(1.0), DomainError);
  CHECK_THROWS_AS(parse("sqrt(r-2)").evaluate(1.0), DomainError);
  CHECK_THROWS_AS(parse("1/(r-1)").evaluate(1.0), DomainError);
}

TEST_CASE("hand-derived derivatives") {
  const double r = 1.7;
  CHECK(parse("r^3").derivative().evaluate(r) == doctest::Approx(3 * r * r));
  CHECK(parse("sin(r)*cos(r)").derivative().evaluate(r) == doctest::Approx(std::cos(2 * r)));
  CHECK(parse("ln(r)").derivative().evaluate(r) == doctest::Approx(1 / r));
  CHECK(parse("sqrt(1+r^2)").derivative().evaluate(r) == doctest::Approx(r / std::sqrt(1 + r * r)));
  CHECK(parse("exp(-r)/r").derivative().evaluate(r) == doctest::Approx(-std::exp(-r) * (r + 1) / (r * r)));
  CHECK(parse("abs(r-2)").derivative().evaluate(r) == doctest::Approx(-1.0));
  CHECK(parse("tan(r/4)").derivative().evaluate(r) ==
        doctest::Approx(0.25 / (std::cos(r / 4) * std::cos(r / 4))));
  CHECK(parse("a*r^2", {"a"}).derivative().evaluate(r, {{"a", 3.0}}) == doctest::Approx(6 * r));
}

TEST_CASE("symbolic derivative matches finite differences on random expressions") {
  CounterRng rng(7, 1);
  int checked = 0;
  for (int attempt = 0; attempt < 5000 && checked < 1000; ++attempt) {
    const Expr e = random_expr(rng, 6);
    const Expr de = e.derivative();
    const double r = rng.uniform(0.5, 2.0);
    const double h = 1e-6 * std::max(1.0, std::abs(r));
    double exact = 0.0, fd = 0.0, coarse = 0.0;
    try {
      exact = de.evaluate(r);
      fd = central_difference(e, r, h);
      coarse = central_difference(e, r, 1e-3);
    } catch (const DomainError&) {
      continue;
    }
    // Safe domain: finite, moderate values, and smooth enough that a coarse step agrees.
    if (!std::isfinite(exact) || !std::isfinite(fd) || std::abs(e.evaluate(r)) > 1e3 || std::abs(exact) > 1e6) continue;
    if (std::abs(coarse - fd) > 1e-3 * std::max(1.0, std::abs(fd))) continue;
    ++checked;
    INFO(e.to_string(), " at r = ", r);
    CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
  }
  CHECK(checked == 1000);
}

TEST_CASE("printing round-trips through the parser") {
  CounterRng rng(11, 2);
  for (int k = 0; k < 500; ++k) {
    const Expr e = random_expr(rng, 4);
    const Expr back = parse(e.to_string());
    for (double r : {0.6, 1.3, 1.9}) {
      double a = 0.0, b = 0.0;
      try {
        a = e.evaluate(r);
      } catch (const DomainError&) {
        CHECK_THROWS_AS(back.evaluate(r), DomainError);
        continue;
      }
      b = back.evaluate(r);
      INFO(e.to_string());
      if (std::isnan(a))
        CHECK(std::isnan(b));
      else
        CHECK(std::abs(a - b) <= 1e-15 * std::abs(a));
    }
  }
}

TEST_CASE("printed expressions re-parse to identical values at 100 random points") {
  CounterRng rng(12, 0);
  for (int k = 0; k < 50; ++k) {
    const Expr e = random_expr(rng, 4);
    const Expr back = parse(e.to_string());
    for (int j = 0; j < 100; ++j) {
      const double r = rng.uniform(0.1, 3.0);
      double a = 0.0;
      try {
        a = e.evaluate(r);
      } catch (const DomainError&) {
        CHECK_THROWS_AS(back.evaluate(r), DomainError);
        continue;
      }
      const double b = back.evaluate(r);
      INFO(e.to_string(), " at ", r);
      if (std::isnan(a))
        CHECK(std::isnan(b));
      else
        CHECK(std::abs(a - b) <= 1e-15 * std::abs(a));
    }
  }
}

TEST_CASE("constant folding keeps exact values") {
  CHECK(parse("2*3+1").constant_value().value() == 7.0);
  CHECK(parse("0*r").constant_value().value() == 0.0);
  CHECK_FALSE(parse("1*r").constant_value().has_value());
  CHECK(parse("r-r").evaluate(5.0) == 0.0);
}

TEST_CASE("rational exponents") {
  CHECK(Rational(4, -6) == Rational(-2, 3));
  CHECK(Rational::from_double(1.5).value() == Rational(3, 2));
  CHECK(Rational::from_double(0.1).value() == Rational(1, 10));
  CHECK_FALSE(Rational::from_double(std::numbers::pi, 100).has_value());
  CHECK(pow(Expr::variable(), Rational(1, 3)).evaluate(8.0) == doctest::Approx(2.0));
}
