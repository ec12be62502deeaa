#include "qms/potentials.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "qms/error.hpp"
#include "qms/quadrature.hpp"

namespace qms {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

const Expr R = Expr::variable();
Expr C(double v) { return Expr::constant(v); }

double fd_derivative(const std::function<double(double)>& u, double r) {
  const double h = 1e-4 * std::max(1.0, r);
  const double coarse = (u(r + h) - u(r - h)) / (2.0 * h);
  const double fine = (u(r + h / 2) - u(r - h / 2)) / h;
  return (4.0 * fine - coarse) / 3.0;
}

// U' against a Richardson difference of U at up to 8 points of `domain`.
void check_derivative(const std::string& label, const Expr& u, const Expr& du, const Interval& domain) {
  for (double r : domain.samples(8)) {
    const double h = 1e-4 * std::max(1.0, r);
    if (!domain.contains(r - h) || !domain.contains(r + h)) continue;
    double exact = 0.0;
    double approx = 0.0;
    try {
      exact = du.evaluate(r);
      approx = fd_derivative([&](double x) { return u.evaluate(x); }, r);
    } catch (const DomainError&) {
      continue;
    }
    const double scale = std::max({1.0, std::abs(exact), std::abs(u.evaluate(r)) / std::max(r, 1e-3)});
    if (std::abs(exact - approx) > 1e-6 * scale)
      throw ParameterError("potential '" + label + "': U' disagrees with finite differences at r = " +
                           std::to_string(r));
  }
}

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::closed_form: return "closed-form";
    case Provenance::quadrature: return "quadrature";
    case Provenance::user: return "user";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec::PotentialSpec(std::string label, Expr u, Provenance provenance, Couplings couplings,
                             Interval domain)
    : label_(std::move(label)),
      provenance_(provenance),
      couplings_(couplings),
      domain_(domain),
      u_expr_(u),
      du_expr_(u.derivative()) {
  if (const auto unbound = u.parameters(); !unbound.empty())
    throw ParameterError("potential '" + label_ + "' has unbound parameter '" + *unbound.begin() + "'");
  if (domain_.empty()) throw ParameterError("potential '" + label_ + "' has an empty domain");
  check_derivative(label_, *u_expr_, *du_expr_, domain_);
}

PotentialSpec::PotentialSpec(std::string label, Radial u, Radial du, Provenance provenance, Couplings couplings,
                             Interval domain)
    : label_(std::move(label)),
      provenance_(provenance),
      couplings_(couplings),
      domain_(domain),
      u_(std::move(u)),
      du_(std::move(du)) {
  if (!u_ || !du_) throw ParameterError("potential '" + label_ + "' needs both U and U'");
  if (domain_.empty()) throw ParameterError("potential '" + label_ + "' has an empty domain");
}

PotentialSpec PotentialSpec::zero() { return PotentialSpec("none", C(0.0), Provenance::closed_form); }

double PotentialSpec::value(double r) const {
  if (!domain_.contains(r))
    throw DomainError("r = " + std::to_string(r) + " outside the domain of potential '" + label_ + "'");
  return u_expr_ ? u_expr_->evaluate(r) : u_(r);
}

double PotentialSpec::derivative(double r) const {
  if (!domain_.contains(r))
    throw DomainError("r = " + std::to_string(r) + " outside the domain of potential '" + label_ + "'");
  return du_expr_ ? du_expr_->evaluate(r) : du_(r);
}

SystemSpec::SystemSpec(MetricSpec metric_, PotentialSpec potential_, double mu2_, std::vector<double> b_,
                       std::string name_)
    : metric(std::move(metric_)),
      potential(std::move(potential_)),
      mu2(mu2_),
      b(std::move(b_)),
      name(std::move(name_)) {
  if (b.size() < 2) throw ParameterError("system dimension N must be at least 2");
  if (!(mu2 >= 0.0)) throw ParameterError("monopole strength mu2 must be nonnegative");
  for (double v : b)
    if (!std::isfinite(v)) throw ParameterError("centrifugal coefficients must be finite");
  if (domain().empty()) throw ParameterError("metric and potential domains do not overlap");
}

// ---------------------------------------------------------------------------
// Green functions

std::optional<Expr> green_closed_form(const MetricSpec& metric) {
  const auto& id = metric.id();
  const Bindings& p = metric.params();
  std::optional<Expr> u;
  auto param = [&](const char* name) { return p.at(name); };

  if (id == "euclidean") {
    u = -(C(1.0) / R);
  } else if (id == "spherical" || id == "hyperbolic") {
    u = (C(param("kappa")) * R * R - C(1.0)) / R;
  } else if (id == "darboux1") {
    u = sqrt(ln(R));
  } else if (id == "darboux2") {
    u = sqrt(C(1.0) + ln(R) * ln(R));
  } else if (id == "darboux3a") {
    u = sqrt(C(1.0) + R);
  } else if (id == "darboux3b") {
    if (param("k") == 0.0) return std::nullopt;
    u = sqrt(C(param("k")) + R * R) / R;
  } else if (id == "darboux4") {
    u = sqrt(C(param("a")) + cos(ln(R)));
  } else if (id == "taub-nut") {
    u = sqrt(C(4.0 * param("m")) / R + C(1.0));
  } else if (id == "nu-fold") {
    const Rational nu = rational_parameter(param("nu"));
    u = sqrt(C(param("a")) * pow(R, Rational(-nu.den, nu.num)) + C(param("b")));
  } else if (id == "nu-fold-a0") {
    const Rational nu = rational_parameter(param("nu"));
    u = -pow(R, Rational(-nu.den, nu.num));
  } else {
    return std::nullopt;
  }

  // A custom metric reusing a catalog id must not inherit its Green function.
  try {
    const MetricSpec reference = catalog_lookup(id, p);
    for (double r : metric.domain().samples(8)) {
      const double a = metric.conformal_factor(r);
      const double b = reference.conformal_factor(r);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(b))) return std::nullopt;
    }
    if (!(reference.domain().lo == metric.domain().lo && reference.domain().hi == metric.domain().hi))
      return std::nullopt;
  } catch (const Error&) {
    return std::nullopt;
  }
  return u;
}

double green_function_quadrature(const MetricSpec& metric, double r) {
  metric.require_in_domain(r);
  const double r0 = metric.domain().reference_point();
  // Integrate in x = ln r', where the integrand becomes 1 / (r' f(r')).
  auto integrand = [&](double x) {
    const double rp = std::exp(x);
    return 1.0 / (rp * metric.conformal_factor(rp));
  };
  return integrate(integrand, std::log(r0), std::log(r)).value;
}

double green_function(const MetricSpec& metric, double r) {
  metric.require_in_domain(r);
  if (const auto u = green_closed_form(metric)) return u->evaluate(r);
  return green_function_quadrature(metric, r);
}

GreenFunctionTable::GreenFunctionTable(const MetricSpec& metric, std::size_t nodes)
    : metric_(std::make_shared<const MetricSpec>(metric)),
      metric_id_(metric.id()),
      r0_(metric.domain().reference_point()) {
  if (nodes < 4) throw ParameterError("Green function table needs at least 4 nodes");
  const Interval& dom = metric.domain();
  r_.resize(nodes);
  if (dom.bounded() && dom.lo > 0.0) {
    const double pad = 1e-6 * (dom.hi - dom.lo);
    for (std::size_t k = 0; k < nodes; ++k)
      r_[k] = dom.lo + pad + (dom.hi - dom.lo - 2.0 * pad) * static_cast<double>(k) / static_cast<double>(nodes - 1);
  } else {
    // Logarithmic in r - lo, six decades around the natural scale.
    const double scale = std::max(1.0, std::abs(dom.lo));
    const double top = dom.bounded() ? std::log10((dom.hi - dom.lo) / scale) - 1e-6 : 3.0;
    const double bottom = top - 6.0;
    for (std::size_t k = 0; k < nodes; ++k) {
      const double e = bottom + (top - bottom) * static_cast<double>(k) / static_cast<double>(nodes - 1);
      r_[k] = dom.lo + scale * std::pow(10.0, e);
    }
  }

  auto integrand = [this](double x) {
    const double rp = std::exp(x);
    return 1.0 / (rp * metric_->conformal_factor(rp));
  };
  u_.assign(nodes, 0.0);
  for (std::size_t k = 1; k < nodes; ++k)
    u_[k] = u_[k - 1] + integrate(integrand, std::log(r_[k - 1]), std::log(r_[k])).value;

  // Shift so that U(r0) = 0.
  const auto it = std::lower_bound(r_.begin(), r_.end(), r0_);
  const std::size_t k0 = it == r_.end() ? nodes - 1 : static_cast<std::size_t>(it - r_.begin());
  const double at_r0 = u_[k0] + integrate(integrand, std::log(r_[k0]), std::log(r0_)).value;
  for (double& v : u_) v -= at_r0;

  slope_.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) slope_[k] = derivative(r_[k]);
  // Fritsch-Carlson limiting keeps each segment monotone.
  for (std::size_t k = 0; k + 1 < nodes; ++k) {
    const double delta = (u_[k + 1] - u_[k]) / (r_[k + 1] - r_[k]);
    if (delta == 0.0) {
      slope_[k] = slope_[k + 1] = 0.0;
      continue;
    }
    const double a = slope_[k] / delta;
    const double b = slope_[k + 1] / delta;
    const double norm = std::hypot(a, b);
    if (norm > 3.0) {
      slope_[k] = 3.0 * a / norm * delta;
      slope_[k + 1] = 3.0 * b / norm * delta;
    }
  }
}

double GreenFunctionTable::value(double r) const {
  if (!(r >= r_.front() && r <= r_.back())) return green_function_quadrature(*metric_, r);
  auto it = std::upper_bound(r_.begin(), r_.end(), r);
  std::size_t k = it == r_.begin() ? 0 : static_cast<std::size_t>(it - r_.begin()) - 1;
  if (k + 1 >= r_.size()) k = r_.size() - 2;
  const double h = r_[k + 1] - r_[k];
  const double t = (r - r_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * u_[k] + (t3 - 2 * t2 + t) * h * slope_[k] + (-2 * t3 + 3 * t2) * u_[k + 1] +
         (t3 - t2) * h * slope_[k + 1];
}

double GreenFunctionTable::derivative(double r) const {
  const double f = metric_->conformal_factor(r);
  return 1.0 / (r * r * f);
}

// ---------------------------------------------------------------------------
// KC and oscillator potentials

namespace {

std::shared_ptr<const GreenFunctionTable> table_for(const MetricSpec& metric) {
  return std::make_shared<const GreenFunctionTable>(metric);
}

// Sub-interval between consecutive zeros of U holding the reference point.
Interval oscillator_domain(const MetricSpec& metric) {
  const Interval& dom = metric.domain();
  const double r0 = dom.reference_point();
  double lo = dom.lo;
  double hi = dom.hi;
  for (double z : green_zeros(metric)) {
    if (std::abs(z - r0) <= 1e-9 * std::max(1.0, r0)) {
      hi = std::min(hi, z);
    } else if (z < r0) {
      lo = std::max(lo, z);
    } else {
      hi = std::min(hi, z);
    }
  }
  // A zero at r0 closes the interval from above; keep the largest zero below it.
  Interval out{lo, hi};
  if (out.empty()) throw ParameterError("oscillator potential on '" + metric.id() + "' has an empty sub-domain");
  return out;
}

}  // namespace

std::vector<double> green_zeros(const MetricSpec& metric) {
  const Interval& dom = metric.domain();
  const auto closed = green_closed_form(metric);
  // The anchored quadrature is strictly increasing, so r0 is its only zero.
  if (!closed) return {dom.reference_point()};

  auto u = [&](double r) { return closed->evaluate(r); };
  std::vector<double> grid;
  constexpr int kScan = 4000;
  if (dom.bounded()) {
    for (int k = 1; k < kScan; ++k) grid.push_back(dom.lo + (dom.hi - dom.lo) * k / kScan);
  } else {
    const double scale = std::max(1.0, std::abs(dom.lo));
    for (int k = 0; k <= kScan; ++k) grid.push_back(dom.lo + scale * std::pow(10.0, -6.0 + 12.0 * k / kScan));
  }
  const double r0 = dom.reference_point();
  grid.push_back(r0);
  std::sort(grid.begin(), grid.end());

  std::vector<double> zeros;
  double prev_r = grid.front();
  double prev_u = u(prev_r);
  if (prev_u == 0.0) zeros.push_back(prev_r);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double r = grid[k];
    const double v = u(r);
    if (v == 0.0) {
      zeros.push_back(r);
    } else if (prev_u != 0.0 && std::signbit(v) != std::signbit(prev_u)) {
      std::uintmax_t iters = 200;
      const auto bracket = boost::math::tools::toms748_solve(u, prev_r, r, prev_u, v,
                                                             boost::math::tools::eps_tolerance<double>(52), iters);
      zeros.push_back(0.5 * (bracket.first + bracket.second));
    }
    prev_r = r;
    prev_u = v;
  }
  zeros.erase(std::unique(zeros.begin(), zeros.end()), zeros.end());
  return zeros;
}

PotentialSpec kc_potential(const MetricSpec& metric, double alpha) {
  const Couplings couplings{alpha, std::nullopt, std::nullopt};
  if (const auto u = green_closed_form(metric))
    return PotentialSpec("kc", C(alpha) * *u, Provenance::closed_form, couplings, metric.domain());
  auto table = table_for(metric);
  return PotentialSpec(
      "kc", [table, alpha](double r) { return alpha * table->value(r); },
      [table, alpha](double r) { return alpha * table->derivative(r); }, Provenance::quadrature, couplings,
      metric.domain());
}

PotentialSpec shifted_oscillator_potential(const MetricSpec& metric, double beta, double gamma) {
  const Interval dom = oscillator_domain(metric);
  const Couplings couplings{std::nullopt, beta, gamma};
  const std::string label = gamma == 0.0 ? "oscillator" : "shifted-oscillator";
  if (const auto u = green_closed_form(metric)) {
    Expr e = C(beta) / (*u * *u);
    if (gamma != 0.0) e = e + C(gamma);
    return PotentialSpec(label, e, Provenance::closed_form, couplings, dom);
  }
  auto table = table_for(metric);
  return PotentialSpec(
      label,
      [table, beta, gamma](double r) {
        const double u = table->value(r);
        return beta / (u * u) + gamma;
      },
      [table, beta](double r) {
        const double u = table->value(r);
        return -2.0 * beta * table->derivative(r) / (u * u * u);
      },
      Provenance::quadrature, couplings, dom);
}

PotentialSpec oscillator_potential(const MetricSpec& metric, double beta) {
  return shifted_oscillator_potential(metric, beta, 0.0);
}

// ---------------------------------------------------------------------------
// Catalog text

const std::vector<PotentialCatalogEntry>& potential_catalog() {
  static const std::vector<PotentialCatalogEntry> table = {
      {"euclidean", "-1/|q|", "-alpha/|q|", "beta q^2", "mu2/(2 q^2)", "(1/2) sum_i b_i/q_i^2"},
      {"spherical", "(kappa q^2-1)/|q|", "alpha (q^2-1)/|q|", "beta q^2/(q^2-1)^2", "mu2 (1+q^2)^2/(2 q^2)",
       "(1/2)(1+q^2)^2 sum_i b_i/q_i^2"},
      {"hyperbolic", "(kappa q^2-1)/|q|", "-alpha (q^2+1)/|q|", "beta q^2/(q^2+1)^2", "mu2 (1-q^2)^2/(2 q^2)",
       "(1/2)(1-q^2)^2 sum_i b_i/q_i^2"},
      {"darboux1", "sqrt(ln|q|)", "alpha sqrt(ln|q|)", "beta/ln|q|", "mu2/(2 ln|q|)",
       "q^2/(2 ln|q|) sum_i b_i/q_i^2"},
      {"darboux2", "sqrt(1+ln^2|q|)", "alpha sqrt(1+ln^2|q|)", "beta/(1+ln^2|q|)",
       "mu2 ln^2|q|/(2(1+ln^2|q|))", "q^2 ln^2|q|/(2(1+ln^2|q|)) sum_i b_i/q_i^2"},
      {"darboux3a", "sqrt(1+|q|)", "alpha sqrt(1+|q|)", "beta/(1+|q|)", "mu2 q^2/(2(1+|q|))",
       "q^4/(2(1+|q|)) sum_i b_i/q_i^2"},
      {"darboux3b", "sqrt(k+q^2)/|q| (k != 0)", "alpha sqrt(k+q^2)/|q|", "beta q^2/(k+q^2)",
       "mu2/(2 q^2 (k+q^2))", "1/(2(k+q^2)) sum_i b_i/q_i^2"},
      {"darboux4", "sqrt(a+cos(ln|q|))", "alpha sqrt(a+cos(ln|q|))", "beta/(a+cos(ln|q|))",
       "mu2 sin^2(ln|q|)/(2(a+cos(ln|q|)))", "q^2 sin^2(ln|q|)/(2(a+cos(ln|q|))) sum_i b_i/q_i^2"},
      {"taub-nut", "sqrt(4m/|q|+1)", "alpha sqrt(4m/|q|+1)", "beta |q|/(4m+|q|)", "mu2/(2|q|(4m+|q|))",
       "|q|/(2(4m+|q|)) sum_i b_i/q_i^2"},
      {"nu-fold", "sqrt(a |q|^(-1/nu)+b)", "alpha sqrt(a |q|^(-1/nu)+b)", "beta/(a |q|^(-1/nu)+b)",
       "mu2/(2|q|^(1/nu) (a+b|q|^(1/nu)))", "|q|^(2-1/nu)/(2(a+b|q|^(1/nu))) sum_i b_i/q_i^2"},
      {"nu-fold-a0", "-|q|^(-1/nu)", "-alpha/|q|^(1/nu)", "beta |q|^(2/nu)", "mu2/(2|q|^(2/nu))",
       "(1/2)|q|^(2-2/nu) sum_i b_i/q_i^2"},
  };
  return table;
}

const PotentialCatalogEntry& potential_catalog_entry(const std::string& space_id) {
  const auto& table = potential_catalog();
  auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.space_id == space_id; });
  if (it == table.end()) throw ParameterError("unknown space '" + space_id + "'");
  return *it;
}

// ---------------------------------------------------------------------------
// Named systems

const std::vector<NamedSystemInfo>& named_system_catalog() {
  static const std::vector<NamedSystemInfo> table = {
      {"mic-kepler",
       "flat MIC-Kepler: p^2/2 - alpha/|q| + mu2/(2 q^2)",
       {{"alpha", std::nullopt, "KC strength"}, {"mu2", std::nullopt, "monopole strength"}}},
      {"mic-kepler-spherical",
       "MIC-Kepler on the sphere of curvature kappa: KC alpha (kappa q^2-1)/|q| plus monopole",
       {{"alpha", std::nullopt, "KC strength"},
        {"mu2", std::nullopt, "monopole strength"},
        {"kappa", 1.0, "sectional curvature, > 0"}}},
      {"mic-kepler-hyperbolic",
       "MIC-Kepler on hyperbolic space of curvature kappa: KC alpha (kappa q^2-1)/|q| plus monopole",
       {{"alpha", std::nullopt, "KC strength"},
        {"mu2", std::nullopt, "monopole strength"},
        {"kappa", -1.0, "sectional curvature, < 0"}}},
      {"taub-nut-system",
       "Taub-NUT: multifold Kepler with nu = 1, a = 4m, b = 1, c = 1/(2m), d = 1/(4m)^2",
       {{"m", std::nullopt, "NUT parameter, > 0"}, {"mu2", std::nullopt, "monopole strength"}}},
      {"multifold-kepler",
       "nu-fold Kepler: oscillator mu2 d/(2(a|q|^(-1/nu)+b)) plus mu2 c/(2(a+b|q|^(1/nu))) and monopole",
       {{"nu", std::nullopt, "positive rational"},
        {"a", std::nullopt, "real; a = 0 needs b = 1"},
        {"b", std::nullopt, "real"},
        {"c", std::nullopt, "real"},
        {"d", std::nullopt, "real"},
        {"mu2", std::nullopt, "monopole strength"}}},
  };
  return table;
}

namespace {

Bindings complete_params(const NamedSystemInfo& info, const Bindings& given) {
  Bindings full;
  for (const auto& [name, value] : given) {
    if (std::none_of(info.params.begin(), info.params.end(), [&](const auto& p) { return p.name == name; }))
      throw ParameterError("system '" + info.id + "' has no parameter '" + name + "'");
    full[name] = value;
  }
  for (const auto& p : info.params) {
    if (full.count(p.name)) continue;
    if (!p.default_value) throw ParameterError("system '" + info.id + "' requires parameter '" + p.name + "'");
    full[p.name] = *p.default_value;
  }
  return full;
}

// mu2 d / (2 (a r^{-1/nu} + b)) + mu2 c / (2 (a + b r^{1/nu}))
PotentialSpec multifold_potential(Rational nu, double a, double b, double c, double d, double mu2,
                                  const Interval& domain) {
  const Expr x = pow(R, Rational(nu.den, nu.num));
  const Expr x_inv = pow(R, Rational(-nu.den, nu.num));
  const Expr u = C(mu2 * d / 2.0) / (C(a) * x_inv + C(b)) + C(mu2 * c / 2.0) / (C(a) + C(b) * x);
  Couplings couplings;
  if (a != 0.0) {
    couplings.beta = mu2 * d / 2.0;
    couplings.gamma = mu2 * c / (2.0 * a);
  } else {
    couplings.alpha = -mu2 * c / 2.0;
    couplings.gamma = mu2 * d / 2.0;
  }
  return PotentialSpec("multifold", u, Provenance::closed_form, couplings, domain);
}

}  // namespace

SystemSpec named_system(const std::string& id, const Bindings& params, int dimension, std::vector<double> b) {
  const auto& table = named_system_catalog();
  auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.id == id; });
  if (it == table.end()) throw ParameterError("unknown system '" + id + "'");
  if (dimension < 2) throw ParameterError("system dimension N must be at least 2");
  if (b.empty()) b.assign(static_cast<std::size_t>(dimension), 0.0);
  if (static_cast<int>(b.size()) != dimension) throw ParameterError("centrifugal vector length differs from N");

  const Bindings p = complete_params(*it, params);
  const double mu2 = p.at("mu2");

  if (id == "mic-kepler") {
    MetricSpec metric = catalog_lookup("euclidean");
    PotentialSpec u = kc_potential(metric, p.at("alpha"));
    return SystemSpec(std::move(metric), std::move(u), mu2, std::move(b), id);
  }
  if (id == "mic-kepler-spherical" || id == "mic-kepler-hyperbolic") {
    MetricSpec metric =
        catalog_lookup(id == "mic-kepler-spherical" ? "spherical" : "hyperbolic", {{"kappa", p.at("kappa")}});
    PotentialSpec u = kc_potential(metric, p.at("alpha"));
    return SystemSpec(std::move(metric), std::move(u), mu2, std::move(b), id);
  }
  if (id == "taub-nut-system") {
    const double m = p.at("m");
    MetricSpec metric = catalog_lookup("taub-nut", {{"m", m}});
    PotentialSpec u =
        multifold_potential(Rational(1), 4.0 * m, 1.0, 1.0 / (2.0 * m), 1.0 / (16.0 * m * m), mu2, metric.domain());
    return SystemSpec(std::move(metric), std::move(u), mu2, std::move(b), id);
  }
  // multifold-kepler
  const Rational nu = rational_parameter(p.at("nu"));
  const double a = p.at("a");
  const double bb = p.at("b");
  std::optional<MetricSpec> metric;
  if (a != 0.0) {
    metric = catalog_lookup("nu-fold", {{"a", a}, {"b", bb}, {"nu", nu.value()}});
  } else {
    if (bb != 1.0) throw ParameterError("multifold-kepler with a = 0 needs b = 1");
    metric = catalog_lookup("nu-fold-a0", {{"nu", nu.value()}});
  }
  PotentialSpec u = multifold_potential(nu, a, bb, p.at("c"), p.at("d"), mu2, metric->domain());
  return SystemSpec(std::move(*metric), std::move(u), mu2, std::move(b), id);
}

// ---------------------------------------------------------------------------
// Identities

std::vector<IdentityResidual> decomposition_identities(const PhaseState& s, const IdentityParams& ip) {
  const double r = s.radius();
  if (!(r > 0.0)) throw DomainError("identities need |q| > 0");
  const double p2 = s.p_squared();
  const double q2 = r * r;
  const double inv_nu = 1.0 / ip.nu.value();
  const double x = std::pow(r, inv_nu);
  const double mu2 = ip.mu2;
  const double a = ip.a;
  const double b = ip.b;
  const double c = ip.c;
  const double d = ip.d;
  if (!(a + b * x > 0.0)) throw DomainError("identities need a + b |q|^(1/nu) > 0");

  std::vector<IdentityResidual> out;
  auto add = [&](const char* name, double lhs, double rhs) {
    out.push_back({name, lhs, rhs, std::abs(lhs - rhs)});
  };

  // Compact multifold Hamiltonian and its four-term expansion.
  auto expanded = [&](double aa, double bb) {
    const double den = aa + bb * x;
    return std::pow(r, 2.0 - inv_nu) * p2 / (2.0 * den) + mu2 * d / (2.0 * (aa / x + bb)) + mu2 / (2.0 * x * den) +
           mu2 * c / (2.0 * den);
  };
  const double compact = std::pow(r, 2.0 - inv_nu) / (2.0 * (a + b * x)) *
                         (p2 + mu2 / q2 + mu2 * c * std::pow(r, inv_nu - 2.0) + mu2 * d * std::pow(r, 2.0 * inv_nu - 2.0));
  add("multifold-expansion", compact, expanded(a, b));

  add("oscillator-shift", ip.beta / (a / x + b) + ip.gamma,
      (ip.beta + b * ip.gamma) / (a / x + b) + a * ip.gamma / (a + b * x));

  const double reduced = 0.5 * std::pow(r, 2.0 - 2.0 * inv_nu) * p2 + mu2 * c / (2.0 * x) + mu2 / (2.0 * x * x) +
                         mu2 * d / 2.0;
  add("multifold-a0-reduction", expanded(0.0, 1.0), reduced);

  const double m4 = 4.0 * ip.m;
  const double line1 = r * p2 / (2.0 * (m4 + r)) + mu2 * r / (m4 * m4) / (2.0 * (m4 + r)) +
                       mu2 / (2.0 * r * (m4 + r)) + mu2 / m4 / (m4 + r);
  const double line2 = p2 / (2.0 * (1.0 + m4 / r)) + mu2 / (2.0 * m4 * m4) * (1.0 + m4 / r);
  add("taub-nut-lines", line1, line2);

  const double u = std::log(r);
  if (u == 0.0) throw DomainError("darboux2-shift needs ln|q| != 0");
  add("darboux2-shift", ip.beta / (1.0 + u * u) + ip.gamma,
      (ip.beta + ip.gamma) / (1.0 + u * u) + ip.gamma / (1.0 + 1.0 / (u * u)));
  add("darboux3a-shift", ip.beta / (1.0 + std::exp(u)) + ip.gamma,
      (ip.beta + ip.gamma) / (1.0 + std::exp(u)) + ip.gamma / (1.0 + std::exp(-u)));
  return out;
}

}  // namespace qms
