#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace qms {

/// Point (q, p) of the 2N-dimensional phase space in generic coordinates.
struct PhaseState {
  std::vector<double> q;
  std::vector<double> p;

  PhaseState() = default;
  PhaseState(std::vector<double> q_, std::vector<double> p_) : q(std::move(q_)), p(std::move(p_)) {}

  int dimension() const { return static_cast<int>(q.size()); }
  double q_squared() const { return std::inner_product(q.begin(), q.end(), q.begin(), 0.0); }
  double p_squared() const { return std::inner_product(p.begin(), p.end(), p.begin(), 0.0); }
  double q_dot_p() const { return std::inner_product(q.begin(), q.end(), p.begin(), 0.0); }
  double radius() const { return std::sqrt(q_squared()); }

  /// Flattened (q_1..q_N, p_1..p_N).
  std::vector<double> flatten() const;
  static PhaseState unflatten(std::span<const double> x);
};

using PhaseFunction = std::function<double(const PhaseState&)>;

inline std::vector<double> PhaseState::flatten() const {
  std::vector<double> x(q);
  x.insert(x.end(), p.begin(), p.end());
  return x;
}

inline PhaseState PhaseState::unflatten(std::span<const double> x) {
  const auto n = x.size() / 2;
  return {std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)),
          std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(n), x.end())};
}

}  // namespace qms
