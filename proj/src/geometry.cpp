#include "qms/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "qms/error.hpp"

namespace qms {

Interval Interval::intersect(const Interval& o) const {
  return Interval{std::max(lo, o.lo), std::min(hi, o.hi)};
}

double Interval::reference_point() const {
  if (bounded()) return 0.5 * (lo + hi);
  return lo > 0.0 ? 2.0 * lo : 1.0;
}

std::vector<double> Interval::samples(std::size_t n) const {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    if (bounded()) {
      out.push_back(lo + (hi - lo) * u);
    } else {
      const double scale = std::max(1.0, std::abs(lo));
      out.push_back(lo + scale * std::pow(10.0, -2.0 + 4.0 * u));
    }
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Richardson-extrapolated central difference.
double central_difference(const Expr& e, double r) {
  const double h = 1e-4 * std::max(1.0, std::abs(r));
  auto d = [&](double step) { return (e.evaluate(r + step) - e.evaluate(r - step)) / (2.0 * step); };
  return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

}  // namespace

MetricSpec::MetricSpec(std::string id, Expr f, Bindings params, Interval domain, std::string description)
    : id_(std::move(id)),
      description_(std::move(description)),
      params_(std::move(params)),
      domain_(domain),
      f_symbolic_(std::move(f)) {
  if (domain_.empty() || domain_.lo < 0.0)
    throw ParameterError("metric '" + id_ + "' has an empty domain");
  f_ = f_symbolic_.bind(params_);
  if (auto unbound = f_.parameters(); !unbound.empty())
    throw ParameterError("metric '" + id_ + "' has unbound parameter '" + *unbound.begin() + "'");
  df_ = f_.derivative();
  d2f_ = df_.derivative();

  for (double r : domain_.samples(64)) {
    double v = 0.0;
    try {
      v = f_.evaluate(r);
    } catch (const DomainError& e) {
      throw ParameterError("metric '" + id_ + "' undefined at r = " + fmt(r) + ": " + e.what());
    }
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParameterError("metric '" + id_ + "' has f(" + fmt(r) + ") = " + fmt(v) + ", not positive");
  }

  // Spot-check the symbolic derivatives on points well inside the domain.
  Interval inner = domain_;
  if (domain_.bounded()) {
    const double pad = 0.05 * (domain_.hi - domain_.lo);
    inner = Interval{domain_.lo + pad, domain_.hi - pad};
  }
  for (double r : inner.samples(8)) {
    const std::pair<const Expr*, const Expr*> pairs[] = {{&f_, &df_}, {&df_, &d2f_}};
    for (auto [fun, der] : pairs) {
      const double sym = der->evaluate(r);
      const double num = central_difference(*fun, r);
      const double scale = std::max({std::abs(sym), std::abs(num), 1e-6 * std::abs(fun->evaluate(r)) / r});
      if (std::abs(sym - num) > 1e-6 * scale)
        throw ParameterError("metric '" + id_ + "': symbolic derivative inconsistent at r = " + fmt(r));
    }
  }
}

void MetricSpec::require_in_domain(double r) const {
  if (!domain_.contains(r))
    throw DomainError("r = " + fmt(r) + " outside the domain (" + fmt(domain_.lo) + ", " + fmt(domain_.hi) +
                      ") of metric '" + id_ + "'");
}

double MetricSpec::conformal_factor(double r) const {
  require_in_domain(r);
  return f_.evaluate(r);
}

MetricSpec::Jet MetricSpec::jet(double r) const {
  require_in_domain(r);
  return {f_.evaluate(r), df_.evaluate(r), d2f_.evaluate(r)};
}

double scalar_curvature(double r, const MetricSpec::Jet& j, int dimension) {
  if (dimension < 2) throw ParameterError("dimension must be at least 2");
  const double n = dimension;
  // Conformally flat metric f^2 delta: R = -(n-1) e^{-2phi} [2 lap(phi) + (n-2)|grad phi|^2]
  // with phi = ln f, written out in terms of f.
  const double bracket = 2.0 * j.d2f + 2.0 * (n - 1.0) * j.df / r + (n - 4.0) * j.df * j.df / j.f;
  return -(n - 1.0) * bracket / (j.f * j.f * j.f);
}

double scalar_curvature(const MetricSpec& metric, double r, int dimension) {
  return scalar_curvature(r, metric.jet(r), dimension);
}

double geodesic_to_radial(double kappa, double r_hat) {
  if (kappa == 0.0) throw ParameterError("geodesic radius map needs nonzero curvature");
  if (!(r_hat > 0.0)) throw DomainError("geodesic radius must be positive");
  const double s = std::sqrt(std::abs(kappa));
  if (kappa > 0.0) {
    if (s * r_hat >= std::numbers::pi)
      throw DomainError("geodesic radius " + fmt(r_hat) + " reaches the antipodal singularity");
    return std::tan(s * r_hat / 2.0) / s;
  }
  return std::tanh(s * r_hat / 2.0) / s;
}

double radial_to_geodesic(double kappa, double r) {
  if (kappa == 0.0) throw ParameterError("geodesic radius map needs nonzero curvature");
  if (!(r > 0.0)) throw DomainError("radial coordinate must be positive");
  const double s = std::sqrt(std::abs(kappa));
  if (kappa > 0.0) return 2.0 * std::atan(s * r) / s;
  if (s * r >= 1.0) throw DomainError("r = " + fmt(r) + " beyond the hyperbolic boundary");
  return 2.0 * std::atanh(s * r) / s;
}

Rational rational_parameter(double nu, const std::string& name) {
  auto q = Rational::from_double(nu);
  if (!q) throw ParameterError(name + " = " + fmt(nu) + " is not a rational number");
  if (q->num <= 0) throw ParameterError(name + " must be positive");
  return *q;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

const Expr R = Expr::variable();
Expr P(const char* name) { return Expr::parameter(name); }
Expr C(double v) { return Expr::constant(v); }

struct Builder {
  SpaceCatalogEntry entry;
  std::function<MetricSpec(const Bindings&)> build;
};

Interval nu_fold_domain(double a, double b, Rational nu) {
  // a + b r^{1/nu} > 0 with nu > 0
  if (b == 0.0) return a > 0.0 ? Interval{0.0, inf} : Interval{1.0, 0.0};
  const double crit = std::pow(-a / b, nu.value());
  if (a >= 0.0 && b > 0.0) return {0.0, inf};
  if (a > 0.0 && b < 0.0) return {0.0, crit};
  if (a < 0.0 && b > 0.0) return {crit, inf};
  return {1.0, 0.0};
}

const std::vector<Builder>& builders() {
  static const std::vector<Builder> table = [] {
    std::vector<Builder> t;
    t.push_back({{"euclidean", "flat Euclidean space", "1", "r > 0", {}},
                 [](const Bindings& p) { return MetricSpec("euclidean", C(1.0), p, {0.0, inf}, "flat"); }});
    t.push_back({{"spherical", "sphere of constant curvature kappa > 0 (Poincare coordinates)",
                  "4/(1+kappa q^2)^2", "r > 0", {{"kappa", 1.0, "sectional curvature"}}},
                 [](const Bindings& p) {
                   if (!(p.at("kappa") > 0.0)) throw ParameterError("spherical needs kappa > 0");
                   return MetricSpec("spherical", C(2.0) / (C(1.0) + P("kappa") * R * R), p, {0.0, inf},
                                     "constant positive curvature");
                 }});
    t.push_back({{"hyperbolic", "hyperbolic space of constant curvature kappa < 0 (Poincare ball)",
                  "4/(1+kappa q^2)^2", "0 < r < 1/sqrt(-kappa)", {{"kappa", -1.0, "sectional curvature"}}},
                 [](const Bindings& p) {
                   const double k = p.at("kappa");
                   if (!(k < 0.0)) throw ParameterError("hyperbolic needs kappa < 0");
                   return MetricSpec("hyperbolic", C(2.0) / (C(1.0) + P("kappa") * R * R), p,
                                     {0.0, 1.0 / std::sqrt(-k)}, "constant negative curvature");
                 }});
    t.push_back({{"darboux1", "N-dimensional Darboux space of type I", "ln|q|/q^2", "r > 1", {}},
                 [](const Bindings& p) {
                   return MetricSpec("darboux1", sqrt(ln(R)) / R, p, {1.0, inf}, "Darboux I");
                 }});
    t.push_back({{"darboux2", "N-dimensional Darboux space of type II", "(1+ln^2|q|)/(q^2 ln^2|q|)",
                  "r > 1", {}},
                 [](const Bindings& p) {
                   const Expr l = ln(R);
                   return MetricSpec("darboux2", sqrt(C(1.0) + l * l) / (R * Expr::apply(Func::abs, l)), p,
                                     {1.0, inf}, "Darboux II");
                 }});
    t.push_back({{"darboux3a", "N-dimensional Darboux space of type IIIa", "(1+|q|)/q^4", "r > 0", {}},
                 [](const Bindings& p) {
                   return MetricSpec("darboux3a", sqrt(C(1.0) + R) / (R * R), p, {0.0, inf}, "Darboux IIIa");
                 }});
    t.push_back({{"darboux3b", "N-dimensional Darboux space of type IIIb", "k+q^2",
                  "r > 0 (r > sqrt(-k) when k < 0)", {{"k", std::nullopt, "real constant"}}},
                 [](const Bindings& p) {
                   const double k = p.at("k");
                   const Interval dom{k < 0.0 ? std::sqrt(-k) : 0.0, inf};
                   return MetricSpec("darboux3b", sqrt(P("k") + R * R), p, dom, "Darboux IIIb");
                 }});
    t.push_back({{"darboux4", "N-dimensional Darboux space of type IV",
                  "(a+cos(ln|q|))/(q^2 sin^2(ln|q|))", "0 < ln r < pi with a + cos(ln r) > 0",
                  {{"a", std::nullopt, "real constant"}}},
                 [](const Bindings& p) {
                   const double a = p.at("a");
                   if (a <= -1.0) throw ParameterError("darboux4 needs a > -1 for a nonempty domain");
                   const double top = a >= 1.0 ? std::numbers::pi : std::acos(-a);
                   const Expr l = ln(R);
                   return MetricSpec("darboux4",
                                     sqrt(P("a") + cos(l)) / (R * Expr::apply(Func::abs, sin(l))), p,
                                     {1.0, std::exp(top)}, "Darboux IV");
                 }});
    t.push_back({{"taub-nut", "N-dimensional Taub-NUT space", "(4m+|q|)/|q|", "r > 0",
                  {{"m", std::nullopt, "NUT parameter, m > 0"}}},
                 [](const Bindings& p) {
                   if (!(p.at("m") > 0.0)) throw ParameterError("taub-nut needs m > 0");
                   return MetricSpec("taub-nut", sqrt((C(4.0) * P("m") + R) / R), p, {0.0, inf}, "Taub-NUT");
                 }});
    t.push_back({{"nu-fold", "Iwai-Katayama nu-fold Kepler space, a != 0",
                  "(a+b|q|^(1/nu))/|q|^(2-1/nu)", "a + b r^(1/nu) > 0",
                  {{"a", std::nullopt, "nonzero constant"},
                   {"b", std::nullopt, "real constant"},
                   {"nu", std::nullopt, "positive rational"}}},
                 [](const Bindings& p) {
                   const double a = p.at("a");
                   const double b = p.at("b");
                   if (a == 0.0) throw ParameterError("nu-fold needs a != 0 (use nu-fold-a0)");
                   const Rational nu = rational_parameter(p.at("nu"));
                   const Interval dom = nu_fold_domain(a, b, nu);
                   if (dom.empty()) throw ParameterError("nu-fold: a + b r^(1/nu) is never positive");
                   const Expr f = sqrt(P("a") + P("b") * pow(R, Rational(nu.den, nu.num))) *
                                  pow(R, Rational(nu.den, 2 * nu.num) - Rational(1));
                   return MetricSpec("nu-fold", f, p, dom, "nu-fold Kepler space");
                 }});
    t.push_back({{"nu-fold-a0", "Iwai-Katayama nu-fold Kepler space, a = 0, b = 1", "|q|^(2/nu-2)", "r > 0",
                  {{"nu", std::nullopt, "positive rational"}}},
                 [](const Bindings& p) {
                   const Rational nu = rational_parameter(p.at("nu"));
                   return MetricSpec("nu-fold-a0", pow(R, Rational(nu.den, nu.num) - Rational(1)), p,
                                     {0.0, inf}, "nu-fold Kepler space with a = 0");
                 }});
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<SpaceCatalogEntry>& space_catalog() {
  static const std::vector<SpaceCatalogEntry> entries = [] {
    std::vector<SpaceCatalogEntry> out;
    for (const auto& b : builders()) out.push_back(b.entry);
    return out;
  }();
  return entries;
}

MetricSpec catalog_lookup(const std::string& id, const Bindings& params) {
  const auto& table = builders();
  auto it = std::find_if(table.begin(), table.end(), [&](const Builder& b) { return b.entry.id == id; });
  if (it == table.end()) throw ParameterError("unknown space '" + id + "'");

  Bindings full;
  for (const auto& [name, value] : params) {
    const auto& decl = it->entry.params;
    if (std::none_of(decl.begin(), decl.end(), [&](const CatalogParam& c) { return c.name == name; }))
      throw ParameterError("space '" + id + "' has no parameter '" + name + "'");
    full[name] = value;
  }
  for (const auto& p : it->entry.params) {
    if (full.count(p.name)) continue;
    if (!p.default_value) throw ParameterError("space '" + id + "' requires parameter '" + p.name + "'");
    full[p.name] = *p.default_value;
  }
  return it->build(full);
}

}  // namespace qms
