#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qms/error.hpp"
#include "qms/geometry.hpp"
#include "qms/quadrature.hpp"

using namespace qms;

namespace {

// R = -e^{-2 phi} (n-1) [2 (phi'' + (n-1) phi'/r) + (n-2) phi'^2] with phi = ln f,
// phi' and phi'' taken by finite differences of ln f. `scale` sums the magnitudes
// of the terms, since they cancel almost completely on some metrics.
struct CurvatureOracle {
  double value;
  double scale;
};

CurvatureOracle curvature_oracle(const MetricSpec& m, double r, int n) {
  const double h = 1e-3 * std::min({r - m.domain().lo, m.domain().hi - r, r});
  auto phi = [&](double x) { return std::log(m.conformal_factor(x)); };
  const double p1 = (phi(r - 2 * h) - 8 * phi(r - h) + 8 * phi(r + h) - phi(r + 2 * h)) / (12 * h);
  const double p2 =
      (-phi(r - 2 * h) + 16 * phi(r - h) - 30 * phi(r) + 16 * phi(r + h) - phi(r + 2 * h)) / (12 * h * h);
  const double f2 = std::pow(m.conformal_factor(r), 2);
  return {-(n - 1) * (2 * (p2 + (n - 1) * p1 / r) + (n - 2) * p1 * p1) / f2,
          (n - 1) * (2 * std::abs(p2) + 2 * (n - 1) * std::abs(p1) / r + (n - 2) * p1 * p1) / f2};
}

struct Case {
  const char* id;
  Bindings params;
};

const Case kCases[] = {
    {"euclidean", {}},
    {"spherical", {}},
    {"spherical", {{"kappa", 2.5}}},
    {"hyperbolic", {}},
    {"darboux1", {}},
    {"darboux2", {}},
    {"darboux3a", {}},
    {"darboux3b", {{"k", 1.0}}},
    {"darboux3b", {{"k", -1.0}}},
    {"darboux3b", {{"k", 0.0}}},
    {"darboux4", {{"a", 2.0}}},
    {"darboux4", {{"a", 0.5}}},
    {"taub-nut", {{"m", 1.0}}},
    {"nu-fold", {{"a", 1.0}, {"b", 2.0}, {"nu", 1.5}}},
    {"nu-fold-a0", {{"nu", 2.0}}},
};

}  // namespace

TEST_CASE("every catalog metric is positive with consistent derivatives") {
  for (const auto& c : kCases) {
    const MetricSpec m = catalog_lookup(c.id, c.params);
    for (double r : m.domain().samples(24)) {
      const auto jet = m.jet(r);
      CHECK(jet.f > 0.0);
      const double h = 1e-5 * std::min({r - m.domain().lo, m.domain().hi - r, r, 1.0});
      const double fd = (m.conformal_factor(r + h) - m.conformal_factor(r - h)) / (2 * h);
      CHECK(std::abs(fd - jet.df) <= 1e-5 * std::max(1.0, std::abs(jet.df)));
    }
  }
}

TEST_CASE("scalar curvature agrees with the log-factor oracle") {
  for (const auto& c : kCases) {
    const MetricSpec m = catalog_lookup(c.id, c.params);
    for (int n : {2, 3, 5}) {
      for (double r : m.domain().samples(12)) {
        const double got = scalar_curvature(m, r, n);
        const auto want = curvature_oracle(m, r, n);
        INFO(std::string(c.id), " n=", n, " r=", r, " got ", got, " want ", want.value);
        CHECK(std::abs(got - want.value) <= 1e-5 * std::max(1.0, want.scale));
      }
    }
  }
}

TEST_CASE("constant-curvature metrics") {
  for (double kappa : {1.0, -1.0, 0.3, -2.0}) {
    const MetricSpec m = catalog_lookup(kappa > 0 ? "spherical" : "hyperbolic", {{"kappa", kappa}});
    for (int n : {2, 3, 4, 6})
      for (double r : m.domain().samples(10)) CHECK(scalar_curvature(m, r, n) == doctest::Approx(n * (n - 1) * kappa).epsilon(1e-10));
  }
  const MetricSpec flat = catalog_lookup("euclidean");
  CHECK(scalar_curvature(flat, 0.7, 4) == 0.0);
}

TEST_CASE("curvature of f = sqrt(1+r^2) against extended-precision differences") {
  const MetricSpec m = catalog_lookup("darboux3b", {{"k", 1.0}});
  auto f = [](long double r) { return std::sqrt(1.0L + r * r); };
  const long double r = 1.0L, h = 1e-5L;
  const long double f0 = f(r), d1 = (f(r + h) - f(r - h)) / (2 * h), d2 = (f(r + h) - 2 * f0 + f(r - h)) / (h * h);
  const int n = 3;
  const long double want = -(n - 1) * (2 * d2 + 2 * (n - 1) * d1 / r + (n - 4) * d1 * d1 / f0) / (f0 * f0 * f0);
  CHECK(scalar_curvature(m, 1.0, n) == doctest::Approx(static_cast<double>(want)).epsilon(1e-6));
}

TEST_CASE("constant curvature does not vary with r") {
  for (double kappa : {1.0, -1.0}) {
    const MetricSpec m = catalog_lookup(kappa > 0 ? "spherical" : "hyperbolic", {{"kappa", kappa}});
    for (int n : {2, 3, 4, 6}) {
      double sum = 0.0, sum2 = 0.0;
      const auto pts = m.domain().samples(32);
      for (double r : pts) {
        const double v = scalar_curvature(m, r, n);
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / 32.0;
      CHECK(sum2 / 32.0 - mean * mean < 1e-10);
      CHECK(mean == doctest::Approx(n * (n - 1) * kappa).epsilon(1e-12));
    }
  }
}

TEST_CASE("geodesic map examples and metric identity") {
  CHECK(geodesic_to_radial(1.0, std::numbers::pi / 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(geodesic_to_radial(-1.0, 1.0) == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
  CHECK(geodesic_to_radial(-1.0, 1.0) == doctest::Approx(0.46212).epsilon(1e-5));
  CHECK(geodesic_to_radial(1.0, 1e-6) == doctest::Approx(5e-7).epsilon(1e-10));
  for (double kappa : {1.0, -1.0}) {
    auto f = [kappa](double r) { return 2.0 / (1.0 + kappa * r * r); };
    for (int k = 1; k <= 32; ++k) {
      const double s = 0.09 * k;
      const double r = geodesic_to_radial(kappa, s);
      const double h = 1e-6;
      const double dr = (geodesic_to_radial(kappa, s + h) - geodesic_to_radial(kappa, s - h)) / (2 * h);
      CHECK(std::pow(f(r) * dr, 2) == doctest::Approx(1.0).epsilon(1e-9));
      const double target = kappa > 0 ? std::pow(std::sin(s), 2) : std::pow(std::sinh(s), 2);
      CHECK(std::pow(f(r) * r, 2) == doctest::Approx(target).epsilon(1e-9));
      CHECK(radial_to_geodesic(kappa, r) == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("geodesic radius is the integral of f") {
  for (double kappa : {1.0, -1.0, 4.0}) {
    const MetricSpec m = catalog_lookup(kappa > 0 ? "spherical" : "hyperbolic", {{"kappa", kappa}});
    for (double r : m.domain().samples(8)) {
      const double arc = integrate([&](double x) { return m.conformal_factor(x); }, 1e-300, r).value;
      CHECK(radial_to_geodesic(kappa, r) == doctest::Approx(arc).epsilon(1e-10));
      CHECK(geodesic_to_radial(kappa, radial_to_geodesic(kappa, r)) == doctest::Approx(r).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(geodesic_to_radial(1.0, 4.0), DomainError);
  CHECK_THROWS_AS(radial_to_geodesic(-1.0, 1.5), DomainError);
  CHECK_THROWS_AS(geodesic_to_radial(0.0, 1.0), ParameterError);
}

TEST_CASE("catalog domains") {
  CHECK(catalog_lookup("darboux1").domain().lo == 1.0);
  CHECK(catalog_lookup("hyperbolic").domain().hi == doctest::Approx(1.0));
  CHECK(catalog_lookup("darboux3b", {{"k", -4.0}}).domain().lo == doctest::Approx(2.0));
  const Interval d4 = catalog_lookup("darboux4", {{"a", 0.5}}).domain();
  CHECK(d4.lo == 1.0);
  CHECK(d4.hi == doctest::Approx(std::exp(2.0 * std::numbers::pi / 3.0)));
  CHECK(catalog_lookup("darboux4", {{"a", 2.0}}).domain().hi == doctest::Approx(std::exp(std::numbers::pi)));
}

TEST_CASE("catalog rejects bad ids and parameters") {
  CHECK_THROWS_AS(catalog_lookup("bogus"), ParameterError);
  CHECK_THROWS_AS(catalog_lookup("taub-nut"), ParameterError);
  CHECK_THROWS_AS(catalog_lookup("taub-nut", {{"m", 1.0}, {"q", 2.0}}), ParameterError);
  CHECK_THROWS_AS(catalog_lookup("spherical", {{"kappa", -1.0}}), ParameterError);
  CHECK_THROWS_AS(catalog_lookup("darboux4", {{"a", -1.5}}), ParameterError);
  CHECK_THROWS_AS(catalog_lookup("nu-fold", {{"a", 1.0}, {"b", 1.0}, {"nu", -1.0}}), ParameterError);
  CHECK_THROWS_AS(catalog_lookup("euclidean").conformal_factor(-1.0), DomainError);
}

TEST_CASE("a custom metric with a sign change is rejected") {
  CHECK_THROWS_AS(MetricSpec("custom", parse("r-1"), {}, {0.0, 2.0}), ParameterError);
  CHECK_NOTHROW(MetricSpec("custom", parse("r-1"), {}, {1.0, 2.0}));
}

TEST_CASE("interval sampling stays interior") {
  for (const Interval iv : {Interval{0.0, 1.0}, Interval{1.0, INFINITY}, Interval{0.0, INFINITY}}) {
    const auto pts = iv.samples(32);
    CHECK(pts.size() == 32);
    for (double r : pts) CHECK(iv.contains(r));
    CHECK(std::is_sorted(pts.begin(), pts.end()));
  }
  CHECK(Interval{0.0, INFINITY}.reference_point() == 1.0);
  CHECK(Interval{1.0, INFINITY}.reference_point() == 2.0);
  CHECK(Interval{1.0, 3.0}.reference_point() == 2.0);
}
