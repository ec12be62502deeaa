#pragma once

#include <span>
#include <vector>

#include "qms/algebra.hpp"
#include "qms/phase.hpp"

namespace qms {

class MetricSpec;
class PotentialSpec;

/// Spherical phase-space point (r, theta_1..theta_{N-1}; p_r, p_theta).
///
/// q_j = r cos(theta_j) prod_{k<j} sin(theta_k) for j < N and
/// q_N = r prod_k sin(theta_k). The chart needs sin(theta_k) != 0 for
/// k = 1..N-2.
struct SphericalPhaseState {
  double r = 1.0;
  std::vector<double> theta;
  double p_r = 0.0;
  std::vector<double> p_theta;

  int dimension() const { return static_cast<int>(theta.size()) + 1; }
};

PhaseState to_cartesian(const SphericalPhaseState& s);

/// Inverse chart. theta_j lands in [0, pi] for j < N-1 and theta_{N-1} in
/// [0, 2 pi). Throws ChartError on the singular set.
SphericalPhaseState from_cartesian(const PhaseState& s);

/// Total angular momentum L^2 = sum_j p_theta_j^2 / prod_{k<j} sin^2(theta_k).
double angular_momentum_squared(const SphericalPhaseState& s);

/// C_(m) evaluated directly in spherical variables, 2 <= m <= N.
double spherical_casimir(int m, const SphericalPhaseState& s, std::span<const double> b);

/// The separated angular chain C_(2), ..., C_(N) built recursively from
/// C_(2) = p_{N-1}^2 + b_{N-1}/cos^2 + b_N/sin^2.
std::vector<double> angular_chain(const SphericalPhaseState& s, std::span<const double> b);

struct SphericalGenerators {
  Sl2Triple triple;
  double c_n = 0.0;           // C_(N)
  double radial_residual = 0.0;  // |J+ - (p_r^2 + C_(N)/r^2)|
};

SphericalGenerators spherical_generators(const SphericalPhaseState& s, std::span<const double> b);

/// Reduced one-degree-of-freedom Hamiltonian
/// (p_r^2 + (C_N + mu2)/r^2) / (2 f^2) + U(r).
double radial_hamiltonian(double r, double p_r, double c_n, double mu2, const MetricSpec& metric,
                          const PotentialSpec& potential);

/// Closed form of {J+, L^2} in spherical variables.
double j_plus_l2_bracket(const SphericalPhaseState& s, std::span<const double> b);

}  // namespace qms
