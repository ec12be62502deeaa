#pragma once

#include <functional>

namespace qms {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_subdivisions = 2000;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature over [a, b]
/// (a > b integrates backwards). Throws QuadratureError when the error
/// estimate is still above `abs_tol` after `max_subdivisions` bisections.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

/// Integral over [a, inf) with a > 0 via x = a / (1 - t).
QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                       const QuadratureOptions& opts = {});

}  // namespace qms
