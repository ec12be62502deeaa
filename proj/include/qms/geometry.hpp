#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qms/expr.hpp"

namespace qms {

/// Open interval (lo, hi) of admissible radial values; hi may be +infinity.
struct Interval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double r) const { return r > lo && r < hi; }
  bool bounded() const { return hi < std::numeric_limits<double>::infinity(); }
  bool empty() const { return !(hi > lo); }
  Interval intersect(const Interval& o) const;

  /// Reference point used to anchor quadratures: the midpoint of a bounded
  /// interval, 1 for (0, inf) and 2*lo for (lo, inf).
  double reference_point() const;

  /// `n` interior points spread over the interval (uniform when bounded,
  /// logarithmic in r - lo over four decades otherwise).
  std::vector<double> samples(std::size_t n) const;
};

/// Conformal factor f(r) of ds^2 = f(r)^2 (dr^2 + r^2 dOmega^2), with its
/// first and second derivatives and the interval on which it is valid.
///
/// Construction verifies f > 0 on a 64-point grid and checks f', f'' against
/// finite differences; a failing check throws ParameterError.
class MetricSpec {
 public:
  MetricSpec(std::string id, Expr f, Bindings params, Interval domain, std::string description = {});

  const std::string& id() const { return id_; }
  const std::string& description() const { return description_; }
  const Bindings& params() const { return params_; }
  const Interval& domain() const { return domain_; }

  /// f as written, possibly referencing parameters.
  const Expr& f_symbolic() const { return f_symbolic_; }
  const Expr& f() const { return f_; }
  const Expr& df() const { return df_; }
  const Expr& d2f() const { return d2f_; }

  /// Throws DomainError outside the domain.
  double conformal_factor(double r) const;

  struct Jet {
    double f;
    double df;
    double d2f;
  };
  Jet jet(double r) const;

  void require_in_domain(double r) const;

 private:
  std::string id_;
  std::string description_;
  Bindings params_;
  Interval domain_;
  Expr f_symbolic_;
  Expr f_;
  Expr df_;
  Expr d2f_;
};

/// Scalar curvature of the N-dimensional metric at r.
double scalar_curvature(const MetricSpec& metric, double r, int dimension);

/// Same quantity from the metric jet, for callers holding f, f', f'' values.
double scalar_curvature(double r, const MetricSpec::Jet& jet, int dimension);

/// r(r_hat) = tan(sqrt(k) r_hat / 2) / sqrt(k) for constant curvature k != 0
/// (tanh form for k < 0); r_hat is the geodesic distance from the origin.
double geodesic_to_radial(double kappa, double r_hat);
double radial_to_geodesic(double kappa, double r);

struct CatalogParam {
  std::string name;
  std::optional<double> default_value;
  std::string meaning;
};

struct SpaceCatalogEntry {
  std::string id;
  std::string description;
  std::string metric_text;       // coefficient of dq^2
  std::string domain_note;
  std::vector<CatalogParam> params;
};

const std::vector<SpaceCatalogEntry>& space_catalog();

/// Builds the catalog metric `id` with `params` (defaults filled in).
/// Throws ParameterError for an unknown id, unknown or missing parameter,
/// or parameters leaving an empty domain.
MetricSpec catalog_lookup(const std::string& id, const Bindings& params = {});

/// nu must be a positive rational; returns it exactly.
Rational rational_parameter(double nu, const std::string& name = "nu");

}  // namespace qms
