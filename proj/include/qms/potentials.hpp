#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qms/expr.hpp"
#include "qms/geometry.hpp"
#include "qms/phase.hpp"

namespace qms {

enum class Provenance { closed_form, quadrature, user };

const char* to_string(Provenance p);

/// Coupling constants carried along for reporting: KC strength alpha,
/// oscillator strength beta and additive shift gamma.
struct Couplings {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;
};

/// Central potential U(r) with its derivative.
///
/// Expression-backed potentials check U' against finite differences at
/// construction. Quadrature-backed ones carry callables instead of an Expr.
class PotentialSpec {
 public:
  using Radial = std::function<double(double)>;

  PotentialSpec(std::string label, Expr u, Provenance provenance, Couplings couplings = {},
                Interval domain = {});
  PotentialSpec(std::string label, Radial u, Radial du, Provenance provenance, Couplings couplings = {},
                Interval domain = {});

  static PotentialSpec zero();

  const std::string& label() const { return label_; }
  Provenance provenance() const { return provenance_; }
  const Couplings& couplings() const { return couplings_; }
  /// Interval where U is defined; intersected with the metric domain by SystemSpec.
  const Interval& domain() const { return domain_; }
  const std::optional<Expr>& expr() const { return u_expr_; }

  double value(double r) const;
  double derivative(double r) const;

 private:
  std::string label_;
  Provenance provenance_;
  Couplings couplings_;
  Interval domain_;
  std::optional<Expr> u_expr_;
  std::optional<Expr> du_expr_;
  Radial u_;
  Radial du_;
};

/// Metric, potential, monopole strength mu^2 and centrifugal vector b.
struct SystemSpec {
  SystemSpec(MetricSpec metric, PotentialSpec potential, double mu2, std::vector<double> b,
             std::string name = "custom");

  MetricSpec metric;
  PotentialSpec potential;
  double mu2;
  std::vector<double> b;
  std::string name;

  int dimension() const { return static_cast<int>(b.size()); }
  /// Metric domain intersected with the potential domain.
  Interval domain() const { return metric.domain().intersect(potential.domain()); }
};

/// Closed-form Green function registered for a catalog metric, with every
/// parameter bound. nullopt for custom metrics and for darboux3b with k = 0.
std::optional<Expr> green_closed_form(const MetricSpec& metric);

/// U(r) = integral from r0 to r of dr' / (r'^2 f(r')), r0 the domain's
/// reference point. Throws QuadratureError on non-convergence.
double green_function_quadrature(const MetricSpec& metric, double r);

/// Closed form when registered, otherwise the anchored quadrature.
double green_function(const MetricSpec& metric, double r);

/// Quadrature Green function tabulated on a grid and interpolated by
/// monotone cubic Hermite segments with exact slopes 1/(r^2 f). Points off
/// the grid fall back to direct quadrature.
class GreenFunctionTable {
 public:
  explicit GreenFunctionTable(const MetricSpec& metric, std::size_t nodes = 4000);

  const std::string& metric_id() const { return metric_id_; }
  double reference_point() const { return r0_; }
  const std::vector<double>& grid() const { return r_; }
  const std::vector<double>& values() const { return u_; }

  double value(double r) const;
  double derivative(double r) const;

 private:
  std::shared_ptr<const MetricSpec> metric_;
  std::string metric_id_;
  double r0_;
  std::vector<double> r_;
  std::vector<double> u_;
  std::vector<double> slope_;
};

/// U_KC = alpha U.
PotentialSpec kc_potential(const MetricSpec& metric, double alpha);

/// U_O = beta / U^2 (+ gamma for the shifted form), restricted to the
/// sub-interval between zeros of U that contains the domain's reference
/// point (the one below it when the reference point is itself a zero).
PotentialSpec oscillator_potential(const MetricSpec& metric, double beta);
PotentialSpec shifted_oscillator_potential(const MetricSpec& metric, double beta, double gamma);

/// Zeros of U inside the metric domain, ascending.
std::vector<double> green_zeros(const MetricSpec& metric);

/// Potential catalog text for one space: KC, oscillator, monopole and
/// centrifugal terms as written in generic coordinates.
struct PotentialCatalogEntry {
  std::string space_id;
  std::string green;
  std::string kc;
  std::string oscillator;
  std::string monopole;
  std::string centrifugal;
};

const std::vector<PotentialCatalogEntry>& potential_catalog();
const PotentialCatalogEntry& potential_catalog_entry(const std::string& space_id);

/// Named composite systems: mic-kepler, mic-kepler-spherical,
/// mic-kepler-hyperbolic, taub-nut-system, multifold-kepler. `params` holds
/// the system constants (mu2 among them); `b` defaults to zeros of length
/// `dimension`.
SystemSpec named_system(const std::string& id, const Bindings& params, int dimension = 3,
                        std::vector<double> b = {});

struct NamedSystemInfo {
  std::string id;
  std::string description;
  std::vector<CatalogParam> params;
};

const std::vector<NamedSystemInfo>& named_system_catalog();

/// Constants for the decomposition identities of the composite systems.
struct IdentityParams {
  Rational nu{3, 2};
  double a = 1.0;
  double b = 2.0;
  double c = 0.3;
  double d = 0.7;
  double mu2 = 1.0;
  double beta = 1.0;
  double gamma = 0.5;
  double m = 1.0;
};

struct IdentityResidual {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// Evaluates both sides of each algebraic identity at the phase point:
/// multifold-expansion, oscillator-shift, multifold-a0-reduction,
/// taub-nut-lines, darboux2-shift and darboux3a-shift (u = ln|q|).
std::vector<IdentityResidual> decomposition_identities(const PhaseState& s, const IdentityParams& params);

}  // namespace qms
