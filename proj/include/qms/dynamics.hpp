#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qms/algebra.hpp"
#include "qms/error.hpp"
#include "qms/phase.hpp"
#include "qms/potentials.hpp"

namespace qms {

/// Throws DomainError unless |q| lies in the system domain and q_i != 0
/// wherever b_i != 0.
void check_state(const SystemSpec& sys, const PhaseState& s);

/// H = [p^2 + mu2/q^2 + sum_i b_i/q_i^2] / (2 f(|q|)^2) + U(|q|).
double hamiltonian(const SystemSpec& sys, const PhaseState& s);

/// Same value grouped as [J+ + mu2/J-] / (2 f(sqrt(J-))^2) + U(sqrt(J-)).
double hamiltonian_coalgebra(const SystemSpec& sys, const PhaseState& s);

struct Gradient {
  std::vector<double> dq;  // dH/dq
  std::vector<double> dp;  // dH/dp
};

Gradient gradient(const SystemSpec& sys, const PhaseState& s);

enum class Method { dop853, implicit_midpoint };

struct IntegratorControls {
  Method method = Method::dop853;
  double rtol = 1e-10;
  double atol = 1e-12;
  double step = 1e-3;                // implicit midpoint step
  double sample_interval = 0.0;      // 0 records every step
  double fixed_point_tol = 1e-13;
  int max_fixed_point_iterations = 100;
  std::int64_t max_steps = 50'000'000;
  double singular_distance = 1e-10;  // halt when |q_i| drops below this with b_i != 0
};

/// Extra phase-space function recorded alongside H and the integrals.
struct Observable {
  std::string name;
  PhaseFunction fn;
};

struct IntegratorStats {
  std::int64_t steps = 0;
  std::int64_t rejected = 0;
  std::int64_t evaluations = 0;
};

struct TrajectoryRecord {
  int dimension = 0;
  std::vector<double> times;
  std::vector<PhaseState> states;
  std::vector<double> energy;
  std::vector<IntegralSet> integrals;
  std::vector<std::string> extra_names;
  std::vector<std::vector<double>> extras;  // extras[k][sample]
  IntegratorStats stats;

  std::size_t size() const { return times.size(); }
};

/// Integration stopped early. `partial()` holds every sample recorded up to
/// the last valid state, which is also its final entry.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, TrajectoryRecord partial)
      : Error(what), partial_(std::make_shared<TrajectoryRecord>(std::move(partial))) {}
  const TrajectoryRecord& partial() const { return *partial_; }

 private:
  std::shared_ptr<TrajectoryRecord> partial_;
};

/// Integrates Hamilton's equations from s0 over [0, t_end]. Samples fall on
/// multiples of the sample interval plus t_end itself.
TrajectoryRecord integrate(const SystemSpec& sys, const PhaseState& s0, double t_end,
                           const IntegratorControls& controls = {}, const std::vector<Observable>& extras = {});

struct QuantityDrift {
  std::string name;
  double initial = 0.0;
  double drift = 0.0;  // max_t |v(t) - v(0)| / (1 + |v(0)|)
  bool passed = false;
};

struct ConservationReport {
  std::vector<QuantityDrift> quantities;
  double tolerance = 1e-7;
  bool passed = false;

  double max_drift() const;
  const QuantityDrift& find(const std::string& name) const;
};

/// Quantities are named H, Cl2..ClN, Cr2..Cr(N-1) and then the extras.
ConservationReport conservation_report(const TrajectoryRecord& rec, double tolerance = 1e-7);

/// Names in the order conservation_report and the CSV writer use.
std::vector<std::string> quantity_names(int dimension);

}  // namespace qms
