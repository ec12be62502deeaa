#include "qms/algebra.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "qms/error.hpp"

namespace qms {

void check_centrifugal(const PhaseState& s, std::span<const double> b) {
  if (s.q.size() != s.p.size()) throw ParameterError("q and p have different lengths");
  if (b.size() != s.q.size()) throw ParameterError("centrifugal vector length differs from dimension");
  if (!(s.q_squared() > 0.0)) throw DomainError("|q| must be positive");
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] != 0.0 && s.q[i] == 0.0)
      throw DomainError("q_" + std::to_string(i + 1) + " = 0 with nonzero centrifugal coefficient");
}

Sl2Triple sl2_realize(const PhaseState& s, std::span<const double> b) {
  check_centrifugal(s, b);
  double centrifugal = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] != 0.0) centrifugal += b[i] / (s.q[i] * s.q[i]);
  return {s.q_squared(), s.q_dot_p(), s.p_squared() + centrifugal};
}

namespace {

// Casimir of the coproduct over coordinates [first, last).
double casimir_range(int first, int last, const PhaseState& s, std::span<const double> b) {
  double total = 0.0;
  for (int i = first; i < last; ++i) {
    const double qi2 = s.q[i] * s.q[i];
    for (int j = i + 1; j < last; ++j) {
      const double qj2 = s.q[j] * s.q[j];
      const double jij = s.q[i] * s.p[j] - s.q[j] * s.p[i];
      total += jij * jij;
      if (b[i] != 0.0) total += b[i] * qj2 / qi2;
      if (b[j] != 0.0) total += b[j] * qi2 / qj2;
    }
    total += b[i];
  }
  return total;
}

void check_order(int m, int n) {
  if (m < 2 || m > n) throw ParameterError("Casimir order m must satisfy 2 <= m <= N");
}

}  // namespace

double casimir_left(int m, const PhaseState& s, std::span<const double> b) {
  check_centrifugal(s, b);
  check_order(m, s.dimension());
  return casimir_range(0, m, s, b);
}

double casimir_right(int m, const PhaseState& s, std::span<const double> b) {
  check_centrifugal(s, b);
  const int n = s.dimension();
  check_order(m, n);
  return casimir_range(n - m, n, s, b);
}

IntegralSet integrals(const PhaseState& s, std::span<const double> b) {
  check_centrifugal(s, b);
  const int n = s.dimension();
  IntegralSet out;
  for (int m = 2; m <= n; ++m) {
    out.left.push_back(casimir_range(0, m, s, b));
    // Same formula, so C^(N) and C_(N) agree bit for bit.
    out.right.push_back(m == n ? out.left.back() : casimir_range(n - m, n, s, b));
  }
  return out;
}

double so_n_generator(int i, int j, const PhaseState& s) {
  if (!(0 <= i && i < j && j < s.dimension())) throw ParameterError("so(N) generator needs 0 <= i < j < N");
  return s.q[i] * s.p[j] - s.q[j] * s.p[i];
}

std::vector<double> numerical_gradient(const PhaseFunction& f, const PhaseState& s, double eps) {
  std::vector<double> x = s.flatten();
  std::vector<double> grad(x.size());
  auto eval_at = [&](std::size_t k, double value) {
    const double saved = x[k];
    x[k] = value;
    const double out = f(PhaseState::unflatten(x));
    x[k] = saved;
    return out;
  };
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double h = eps * std::max(1.0, std::abs(x[k]));
    const double x0 = x[k];
    const double coarse = (eval_at(k, x0 + h) - eval_at(k, x0 - h)) / (2.0 * h);
    const double fine = (eval_at(k, x0 + h / 2) - eval_at(k, x0 - h / 2)) / h;
    grad[k] = (4.0 * fine - coarse) / 3.0;
  }
  return grad;
}

double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhaseState& s) {
  const auto df = numerical_gradient(f, s);
  const auto dg = numerical_gradient(g, s);
  const std::size_t n = s.q.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += df[i] * dg[n + i] - dg[i] * df[n + i];
  return total;
}

BracketTerms poisson_bracket_terms(const PhaseFunction& f, const PhaseFunction& g, const PhaseState& s) {
  const auto df = numerical_gradient(f, s);
  const auto dg = numerical_gradient(g, s);
  const std::size_t n = s.q.size();
  BracketTerms out;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = df[i] * dg[n + i];
    const double b = dg[i] * df[n + i];
    out.value += a - b;
    out.scale += std::abs(a) + std::abs(b);
  }
  return out;
}

std::vector<double> jacobian_singular_values(std::span<const PhaseFunction> functions, const PhaseState& s) {
  const auto cols = static_cast<Eigen::Index>(2 * s.q.size());
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(functions.size()), cols);
  for (std::size_t row = 0; row < functions.size(); ++row) {
    const auto g = numerical_gradient(functions[row], s);
    for (Eigen::Index c = 0; c < cols; ++c) jac(static_cast<Eigen::Index>(row), c) = g[static_cast<std::size_t>(c)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

int independence_rank(std::span<const PhaseFunction> functions, const PhaseState& s, double rel_threshold) {
  const auto sv = jacobian_singular_values(functions, s);
  if (sv.empty() || sv.front() == 0.0) return 0;
  return static_cast<int>(
      std::count_if(sv.begin(), sv.end(), [&](double v) { return v > rel_threshold * sv.front(); }));
}

}  // namespace qms
