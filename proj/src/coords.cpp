#include "qms/coords.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qms/error.hpp"
#include "qms/geometry.hpp"
#include "qms/potentials.hpp"

namespace qms {

namespace {

// Sines and cosines of the angles, 1-based to follow the chart formulas.
struct Trig {
  std::vector<double> s, c;  // s[k], c[k] for k = 1..N-1; index 0 unused

  explicit Trig(const std::vector<double>& theta) : s(theta.size() + 1, 0.0), c(theta.size() + 1, 0.0) {
    for (std::size_t k = 1; k <= theta.size(); ++k) {
      s[k] = std::sin(theta[k - 1]);
      c[k] = std::cos(theta[k - 1]);
    }
  }

  // prod_{k=lo}^{hi} sin(theta_k), 1 when lo > hi
  double prod_sin(int lo, int hi) const {
    double out = 1.0;
    for (int k = lo; k <= hi; ++k) out *= s[static_cast<std::size_t>(k)];
    return out;
  }
};

void check_shape(const SphericalPhaseState& s) {
  if (s.theta.empty()) throw ParameterError("spherical state needs N >= 2");
  if (s.p_theta.size() != s.theta.size()) throw ParameterError("p_theta length differs from theta length");
  if (!(s.r > 0.0)) throw ChartError("spherical chart needs r > 0");
}

void check_chart(const SphericalPhaseState& s, const Trig& t) {
  const int n = s.dimension();
  for (int k = 1; k <= n - 2; ++k)
    if (t.s[static_cast<std::size_t>(k)] == 0.0)
      throw ChartError("sin(theta_" + std::to_string(k) + ") = 0 on the chart's singular set");
}

double pth(const SphericalPhaseState& s, int j) { return s.p_theta[static_cast<std::size_t>(j - 1)]; }
double bj(std::span<const double> b, int j) { return b[static_cast<std::size_t>(j - 1)]; }

void check_b(const SphericalPhaseState& s, std::span<const double> b) {
  if (static_cast<int>(b.size()) != s.dimension())
    throw ParameterError("centrifugal vector length differs from dimension");
}

}  // namespace

PhaseState to_cartesian(const SphericalPhaseState& s) {
  check_shape(s);
  const Trig t(s.theta);
  check_chart(s, t);
  const int n = s.dimension();
  const double r = s.r;
  PhaseState out(std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n)));

  for (int j = 1; j < n; ++j) {
    const double before = t.prod_sin(1, j - 1);
    out.q[static_cast<std::size_t>(j - 1)] = r * t.c[static_cast<std::size_t>(j)] * before;

    double sum = 0.0;
    for (int l = 1; l <= j - 1; ++l)
      sum += t.prod_sin(l + 1, j - 1) / t.prod_sin(1, l - 1) * t.c[static_cast<std::size_t>(l)] * pth(s, l);
    out.p[static_cast<std::size_t>(j - 1)] = before * t.c[static_cast<std::size_t>(j)] * s.p_r +
                                             t.c[static_cast<std::size_t>(j)] / r * sum -
                                             t.s[static_cast<std::size_t>(j)] / (r * before) * pth(s, j);
  }
  {
    out.q[static_cast<std::size_t>(n - 1)] = r * t.prod_sin(1, n - 1);
    double sum = 0.0;
    for (int l = 1; l <= n - 1; ++l)
      sum += t.prod_sin(l + 1, n - 1) / t.prod_sin(1, l - 1) * t.c[static_cast<std::size_t>(l)] * pth(s, l);
    out.p[static_cast<std::size_t>(n - 1)] = t.prod_sin(1, n - 1) * s.p_r + sum / r;
  }
  return out;
}

SphericalPhaseState from_cartesian(const PhaseState& s) {
  const int n = s.dimension();
  if (n < 2 || s.p.size() != s.q.size()) throw ParameterError("phase state needs N >= 2 matching q, p");

  // rho[j] = |(q_j, ..., q_N)| with 1-based j; rho[1] = r.
  std::vector<double> rho(static_cast<std::size_t>(n) + 2, 0.0);
  for (int j = n; j >= 1; --j) {
    const double qj = s.q[static_cast<std::size_t>(j - 1)];
    rho[static_cast<std::size_t>(j)] = std::hypot(rho[static_cast<std::size_t>(j + 1)], qj);
  }
  const double r = rho[1];
  if (!(r > 0.0)) throw ChartError("|q| = 0 has no spherical coordinates");
  for (int j = 2; j <= n - 1; ++j)
    if (rho[static_cast<std::size_t>(j)] == 0.0)
      throw ChartError("q lies on the chart's singular set (sin(theta_" + std::to_string(j - 1) + ") = 0)");

  SphericalPhaseState out;
  out.r = r;
  out.theta.resize(static_cast<std::size_t>(n - 1));
  out.p_theta.resize(static_cast<std::size_t>(n - 1));
  out.p_r = s.q_dot_p() / r;

  auto q = [&](int i) { return s.q[static_cast<std::size_t>(i - 1)]; };
  auto p = [&](int i) { return s.p[static_cast<std::size_t>(i - 1)]; };

  for (int j = 1; j <= n - 2; ++j) {
    const double rho_next = rho[static_cast<std::size_t>(j + 1)];
    out.theta[static_cast<std::size_t>(j - 1)] = std::atan2(rho_next, q(j));
    double tail = 0.0;  // sum_{i>j} q_i p_i
    for (int i = j + 1; i <= n; ++i) tail += q(i) * p(i);
    // p_theta_j = sum_i p_i dq_i/dtheta_j
    out.p_theta[static_cast<std::size_t>(j - 1)] = (q(j) * tail - rho_next * rho_next * p(j)) / rho_next;
  }
  double last = std::atan2(q(n), q(n - 1));
  if (last < 0.0) last += 2.0 * std::numbers::pi;
  out.theta[static_cast<std::size_t>(n - 2)] = last;
  out.p_theta[static_cast<std::size_t>(n - 2)] = q(n - 1) * p(n) - q(n) * p(n - 1);
  return out;
}

double angular_momentum_squared(const SphericalPhaseState& s) {
  check_shape(s);
  const Trig t(s.theta);
  const int n = s.dimension();
  double total = 0.0;
  for (int j = 1; j <= n - 1; ++j) {
    const double ps = t.prod_sin(1, j - 1);
    total += pth(s, j) * pth(s, j) / (ps * ps);
  }
  return total;
}

double spherical_casimir(int m, const SphericalPhaseState& s, std::span<const double> b) {
  check_shape(s);
  check_b(s, b);
  const int n = s.dimension();
  if (m < 2 || m > n) throw ParameterError("Casimir order m must satisfy 2 <= m <= N");
  const Trig t(s.theta);
  const int first = n - m + 1;
  double total = 0.0;
  for (int j = first; j <= n - 1; ++j) {
    double term = pth(s, j) * pth(s, j);
    if (bj(b, j) != 0.0) {
      const double cj = t.c[static_cast<std::size_t>(j)];
      if (cj == 0.0) throw ChartError("cos(theta_" + std::to_string(j) + ") = 0 with nonzero b");
      term += bj(b, j) / (cj * cj);
    }
    const double ps = t.prod_sin(first, j - 1);
    total += term / (ps * ps);
  }
  if (bj(b, n) != 0.0) {
    const double ps = t.prod_sin(first, n - 1);
    if (ps == 0.0) throw ChartError("vanishing sine product with nonzero b_N");
    total += bj(b, n) / (ps * ps);
  }
  return total;
}

std::vector<double> angular_chain(const SphericalPhaseState& s, std::span<const double> b) {
  check_shape(s);
  check_b(s, b);
  const int n = s.dimension();
  const Trig t(s.theta);

  auto cos_term = [&](int j) {
    if (bj(b, j) == 0.0) return 0.0;
    const double c = t.c[static_cast<std::size_t>(j)];
    if (c == 0.0) throw ChartError("cos(theta_" + std::to_string(j) + ") = 0 with nonzero b");
    return bj(b, j) / (c * c);
  };
  auto sin2 = [&](int j) {
    const double v = t.s[static_cast<std::size_t>(j)];
    if (v == 0.0) throw ChartError("sin(theta_" + std::to_string(j) + ") = 0 in the angular chain");
    return v * v;
  };

  std::vector<double> chain;
  chain.reserve(static_cast<std::size_t>(n - 1));
  const int last = n - 1;
  double c2 = pth(s, last) * pth(s, last) + cos_term(last);
  if (bj(b, n) != 0.0) c2 += bj(b, n) / sin2(last);
  chain.push_back(c2);
  for (int l = 3; l <= n; ++l) {
    const int j = n - l + 1;
    chain.push_back(pth(s, j) * pth(s, j) + chain.back() / sin2(j) + cos_term(j));
  }
  return chain;
}

SphericalGenerators spherical_generators(const SphericalPhaseState& s, std::span<const double> b) {
  check_shape(s);
  check_b(s, b);
  const int n = s.dimension();
  const Trig t(s.theta);
  const double r2 = s.r * s.r;

  double centrifugal = 0.0;
  for (int j = 1; j <= n - 1; ++j) {
    if (bj(b, j) == 0.0) continue;
    const double c = t.c[static_cast<std::size_t>(j)];
    const double ps = t.prod_sin(1, j - 1);
    if (c == 0.0) throw ChartError("cos(theta_" + std::to_string(j) + ") = 0 with nonzero b");
    centrifugal += bj(b, j) / (r2 * c * c * ps * ps);
  }
  if (bj(b, n) != 0.0) {
    const double ps = t.prod_sin(1, n - 1);
    if (ps == 0.0) throw ChartError("vanishing sine product with nonzero b_N");
    centrifugal += bj(b, n) / (r2 * ps * ps);
  }

  SphericalGenerators out;
  out.triple.j_minus = r2;
  out.triple.j3 = s.r * s.p_r;
  out.triple.j_plus = s.p_r * s.p_r + angular_momentum_squared(s) / r2 + centrifugal;
  out.c_n = spherical_casimir(n, s, b);
  out.radial_residual = std::abs(out.triple.j_plus - (s.p_r * s.p_r + out.c_n / r2));
  return out;
}

double radial_hamiltonian(double r, double p_r, double c_n, double mu2, const MetricSpec& metric,
                          const PotentialSpec& potential) {
  const double f = metric.conformal_factor(r);
  return (p_r * p_r + (c_n + mu2) / (r * r)) / (2.0 * f * f) + potential.value(r);
}

double j_plus_l2_bracket(const SphericalPhaseState& s, std::span<const double> b) {
  check_shape(s);
  check_b(s, b);
  const int n = s.dimension();
  const Trig t(s.theta);

  // P_l = prod_{k<l} sin^2(theta_k)
  auto big_p = [&](int l) {
    const double ps = t.prod_sin(1, l - 1);
    return ps * ps;
  };

  double total = 0.0;
  for (int j = 1; j <= n - 1; ++j) {
    const double sj = t.s[static_cast<std::size_t>(j)];
    const double cj = t.c[static_cast<std::size_t>(j)];
    const double pj = big_p(j);
    double tail = 0.0;  // sum_{l>j} b_l / (cos^2 theta_l P_l) + b_N / P_N
    for (int l = j + 1; l <= n - 1; ++l) {
      if (bj(b, l) == 0.0) continue;
      const double cl = t.c[static_cast<std::size_t>(l)];
      tail += bj(b, l) / (cl * cl * big_p(l));
    }
    if (bj(b, n) != 0.0) tail += bj(b, n) / big_p(n);

    double d_theta = 0.0;  // dB/dtheta_j / 2
    if (bj(b, j) != 0.0) d_theta += bj(b, j) * sj / (cj * cj * cj * pj);
    if (tail != 0.0) d_theta -= cj / sj * tail;
    total += pth(s, j) / pj * d_theta;
  }
  return 4.0 * total / (s.r * s.r);
}

}  // namespace qms
