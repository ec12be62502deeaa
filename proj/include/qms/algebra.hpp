#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "qms/phase.hpp"

namespace qms {

/// Values of the sl(2,R) generators at a phase-space point:
/// J- = q^2, J3 = q.p, J+ = p^2 + sum_i b_i / q_i^2.
struct Sl2Triple {
  double j_minus = 0.0;
  double j3 = 0.0;
  double j_plus = 0.0;
};

/// Left values C^(2)..C^(N) and right values C_(2)..C_(N); index 0 holds m = 2.
struct IntegralSet {
  std::vector<double> left;
  std::vector<double> right;
};

/// Throws DomainError if some q_i = 0 carries a nonzero b_i, or q = 0.
void check_centrifugal(const PhaseState& s, std::span<const double> b);

Sl2Triple sl2_realize(const PhaseState& s, std::span<const double> b);

/// C^(m) over coordinates 1..m (left) and C_(m) over N-m+1..N (right), 2 <= m <= N.
double casimir_left(int m, const PhaseState& s, std::span<const double> b);
double casimir_right(int m, const PhaseState& s, std::span<const double> b);

IntegralSet integrals(const PhaseState& s, std::span<const double> b);

/// J_ij = q_i p_j - q_j p_i with 0-based indices i < j.
double so_n_generator(int i, int j, const PhaseState& s);

/// Central-difference gradient with step eps * max(1, |x_k|) and one
/// Richardson level; returns (dF/dq, dF/dp) flattened.
std::vector<double> numerical_gradient(const PhaseFunction& f, const PhaseState& s, double eps = 1e-6);

/// {F, G} = sum_i dF/dq_i dG/dp_i - dG/dq_i dF/dp_i by finite differences.
/// Exceptions thrown by F or G at a stencil point propagate.
double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhaseState& s);

/// Bracket value with the magnitude of the terms it sums, sum_i |dF/dq_i dG/dp_i|
/// + |dG/dq_i dF/dp_i|, for judging cancellation relative to the inputs.
struct BracketTerms {
  double value = 0.0;
  double scale = 0.0;

  double relative() const { return std::abs(value) / std::max(1.0, scale); }
};

BracketTerms poisson_bracket_terms(const PhaseFunction& f, const PhaseFunction& g, const PhaseState& s);

/// Numerical rank of the Jacobian of `functions` with respect to (q, p):
/// singular values above `rel_threshold` times the largest one.
int independence_rank(std::span<const PhaseFunction> functions, const PhaseState& s,
                      double rel_threshold = 1e-8);

/// Singular values of the same Jacobian, descending.
std::vector<double> jacobian_singular_values(std::span<const PhaseFunction> functions, const PhaseState& s);

}  // namespace qms
