#include "qms/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "internal/dop853_tableau.hpp"

namespace qms {

void check_state(const SystemSpec& sys, const PhaseState& s) {
  if (s.dimension() != sys.dimension() || s.p.size() != s.q.size())
    throw ParameterError("state dimension differs from system dimension " + std::to_string(sys.dimension()));
  const double r = s.radius();
  if (!sys.domain().contains(r))
    throw DomainError("|q| = " + std::to_string(r) + " outside the domain of system '" + sys.name + "'");
  for (std::size_t i = 0; i < s.q.size(); ++i)
    if (sys.b[i] != 0.0 && s.q[i] == 0.0)
      throw DomainError("q_" + std::to_string(i + 1) + " = 0 with nonzero centrifugal coefficient");
}

namespace {

// p^2 + mu2/q^2 + sum_i b_i/q_i^2
double kinetic_numerator(const SystemSpec& sys, const PhaseState& s, double q2) {
  double k = s.p_squared() + sys.mu2 / q2;
  for (std::size_t i = 0; i < s.q.size(); ++i)
    if (sys.b[i] != 0.0) k += sys.b[i] / (s.q[i] * s.q[i]);
  return k;
}

}  // namespace

double hamiltonian(const SystemSpec& sys, const PhaseState& s) {
  check_state(sys, s);
  const double q2 = s.q_squared();
  const double r = std::sqrt(q2);
  const double f = sys.metric.conformal_factor(r);
  return kinetic_numerator(sys, s, q2) / (2.0 * f * f) + sys.potential.value(r);
}

double hamiltonian_coalgebra(const SystemSpec& sys, const PhaseState& s) {
  check_state(sys, s);
  const Sl2Triple j = sl2_realize(s, sys.b);
  const double root = std::sqrt(j.j_minus);
  const double f = sys.metric.conformal_factor(root);
  return (j.j_plus + sys.mu2 / j.j_minus) / (2.0 * f * f) + sys.potential.value(root);
}

Gradient gradient(const SystemSpec& sys, const PhaseState& s) {
  check_state(sys, s);
  const std::size_t n = s.q.size();
  const double q2 = s.q_squared();
  const double r = std::sqrt(q2);
  const auto jet = sys.metric.jet(r);
  const double f2 = jet.f * jet.f;
  const double k = kinetic_numerator(sys, s, q2);
  const double du = sys.potential.derivative(r);
  // Radial part common to every coordinate, per unit q_i.
  const double radial = -sys.mu2 / (q2 * q2 * f2) - k * jet.df / (f2 * jet.f * r) + du / r;

  Gradient g{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double dq = radial * s.q[i];
    if (sys.b[i] != 0.0) dq -= sys.b[i] / (s.q[i] * s.q[i] * s.q[i] * f2);
    g.dq[i] = dq;
    g.dp[i] = s.p[i] / f2;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Integration

namespace {

using Vec = std::vector<double>;

class Flow {
 public:
  Flow(const SystemSpec& sys, IntegratorStats& stats) : sys_(sys), stats_(stats) {}

  // (dH/dp, -dH/dq); throws DomainError off the domain.
  Vec operator()(const Vec& y) const {
    ++stats_.evaluations;
    const Gradient g = gradient(sys_, PhaseState::unflatten(y));
    Vec dy(y.size());
    const std::size_t n = g.dq.size();
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = g.dp[i];
      dy[n + i] = -g.dq[i];
    }
    return dy;
  }

 private:
  const SystemSpec& sys_;
  IntegratorStats& stats_;
};

class Recorder {
 public:
  Recorder(const SystemSpec& sys, const std::vector<Observable>& extras, TrajectoryRecord& rec)
      : sys_(sys), extras_(extras), rec_(rec) {
    rec_.dimension = sys.dimension();
    for (const auto& e : extras) rec_.extra_names.push_back(e.name);
    rec_.extras.resize(extras.size());
  }

  void record(double t, const Vec& y) {
    const PhaseState s = PhaseState::unflatten(y);
    rec_.times.push_back(t);
    rec_.energy.push_back(hamiltonian(sys_, s));
    rec_.integrals.push_back(integrals(s, sys_.b));
    for (std::size_t k = 0; k < extras_.size(); ++k) rec_.extras[k].push_back(extras_[k].fn(s));
    rec_.states.push_back(s);
  }

  double last_time() const { return rec_.times.empty() ? -1.0 : rec_.times.back(); }

 private:
  const SystemSpec& sys_;
  const std::vector<Observable>& extras_;
  TrajectoryRecord& rec_;
};

std::vector<double> sample_times(double t_end, double interval) {
  std::vector<double> out;
  if (interval > 0.0) {
    for (std::int64_t k = 1;; ++k) {
      const double t = static_cast<double>(k) * interval;
      if (t >= t_end * (1.0 - 1e-12)) break;
      out.push_back(t);
    }
  }
  out.push_back(t_end);
  return out;
}

// Index of a coordinate closer than `threshold` to its centrifugal singularity, or -1.
int near_singular(const SystemSpec& sys, const Vec& y, double threshold) {
  const std::size_t n = y.size() / 2;
  for (std::size_t i = 0; i < n; ++i)
    if (sys.b[i] != 0.0 && std::abs(y[i]) < threshold) return static_cast<int>(i);
  return -1;
}

double rms_norm(const Vec& v, const Vec& scale) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = v[i] / scale[i];
    acc += x * x;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double initial_step(const Flow& flow, const Vec& y0, const Vec& f0, double rtol, double atol, double span) {
  Vec scale(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) scale[i] = atol + std::abs(y0[i]) * rtol;
  const double d0 = rms_norm(y0, scale);
  const double d1 = rms_norm(f0, scale);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  for (int attempt = 0; attempt < 60; ++attempt) {
    Vec y1(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) y1[i] = y0[i] + h0 * f0[i];
    try {
      const Vec f1 = flow(y1);
      Vec diff(y0.size());
      for (std::size_t i = 0; i < y0.size(); ++i) diff[i] = f1[i] - f0[i];
      const double d2 = rms_norm(diff, scale) / h0;
      const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                     : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
      return std::min({100.0 * h0, h1, span});
    } catch (const DomainError&) {
      h0 *= 0.1;
    }
  }
  return h0;
}

class Stepper {
 public:
  Stepper(const SystemSpec& sys, const IntegratorControls& c, TrajectoryRecord& rec, Recorder& recorder)
      : sys_(sys), c_(c), rec_(rec), recorder_(recorder), flow_(sys, rec.stats) {}

  [[noreturn]] void fail(const std::string& why, double t, const Vec& y) {
    if (recorder_.last_time() != t) recorder_.record(t, y);
    throw IntegrationError(why + " at t = " + std::to_string(t), rec_);
  }

  void guard_singular(double t, const Vec& y) {
    if (const int i = near_singular(sys_, y, c_.singular_distance); i >= 0)
      fail("trajectory reached the centrifugal singularity q_" + std::to_string(i + 1) + " = 0", t, y);
  }

  void run_dop853(Vec y, double t_end) {
    namespace T = detail::dop853;
    constexpr double safety = 0.9;
    constexpr double min_factor = 0.2;
    constexpr double max_factor = 10.0;
    constexpr double exponent = -1.0 / 8.0;

    const std::size_t n = y.size();
    double t = 0.0;
    Vec f = flow_(y);
    double h = initial_step(flow_, y, f, c_.rtol, c_.atol, t_end);
    const bool every_step = !(c_.sample_interval > 0.0);
    const auto targets = sample_times(t_end, c_.sample_interval);
    std::size_t next = 0;

    std::array<Vec, T::kStages + 1> k;
    for (auto& row : k) row.assign(n, 0.0);
    Vec y_stage(n), y_new(n);

    while (next < targets.size()) {
      if (rec_.stats.steps >= c_.max_steps) fail("step limit reached", t, y);
      const double target = targets[next];
      const double remaining = target - t;
      const bool lands = h >= remaining;
      const double step = lands ? remaining : h;
      if (step < 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
        fail("step size underflow", t, y);

      bool ok = true;
      Vec f_new;
      try {
        k[0] = f;
        for (int s = 1; s < T::kStages; ++s) {
          for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < s; ++j) acc += T::A[s][j] * k[j][i];
            y_stage[i] = y[i] + step * acc;
          }
          k[s] = flow_(y_stage);
        }
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int j = 0; j < T::kStages; ++j) acc += T::B[j] * k[j][i];
          y_new[i] = y[i] + step * acc;
        }
        f_new = flow_(y_new);
        k[T::kStages] = f_new;
      } catch (const DomainError&) {
        ok = false;
      }

      double err = std::numeric_limits<double>::infinity();
      if (ok) {
        double n5 = 0.0;
        double n3 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double sc = c_.atol + std::max(std::abs(y[i]), std::abs(y_new[i])) * c_.rtol;
          double e3 = 0.0;
          double e5 = 0.0;
          for (int j = 0; j <= T::kStages; ++j) {
            e3 += T::E3[j] * k[j][i];
            e5 += T::E5[j] * k[j][i];
          }
          n3 += (e3 / sc) * (e3 / sc);
          n5 += (e5 / sc) * (e5 / sc);
        }
        err = (n5 == 0.0 && n3 == 0.0) ? 0.0
                                       : std::abs(step) * n5 / std::sqrt((n5 + 0.01 * n3) * static_cast<double>(n));
      }

      if (!(err <= 1.0)) {
        ++rec_.stats.rejected;
        const double factor = std::isfinite(err) ? std::max(min_factor, safety * std::pow(err, exponent)) : 0.5;
        h = step * factor;
        rejected_last_ = true;
        continue;
      }

      const double factor =
          err == 0.0 ? max_factor : std::min(max_factor, safety * std::pow(err, exponent));
      const double grown = step * (rejected_last_ ? std::min(1.0, factor) : factor);
      // A step clipped to a sample time says little about the usable size.
      h = (lands && step < h && factor >= 1.0) ? std::max(h, grown) : grown;
      rejected_last_ = false;

      ++rec_.stats.steps;
      t = lands ? target : t + step;
      y = y_new;
      f = f_new;
      guard_singular(t, y);
      if (lands) {
        recorder_.record(t, y);
        ++next;
      } else if (every_step) {
        recorder_.record(t, y);
      }
    }
  }

  void run_midpoint(Vec y, double t_end) {
    if (!(c_.step > 0.0)) throw ParameterError("implicit midpoint needs a positive step");
    const std::size_t n = y.size();
    const bool every_step = !(c_.sample_interval > 0.0);
    const auto targets = sample_times(t_end, c_.sample_interval);
    std::size_t next = 0;
    double t = 0.0;
    Vec z(n), mid(n);

    while (next < targets.size()) {
      if (rec_.stats.steps >= c_.max_steps) fail("step limit reached", t, y);
      const double target = targets[next];
      const double remaining = target - t;
      // Finish a sample interval with one shorter step rather than a sliver.
      const bool lands = c_.step >= remaining * (1.0 - 1e-12);
      const double h = lands ? remaining : c_.step;

      try {
        const Vec f0 = flow_(y);
        for (std::size_t i = 0; i < n; ++i) z[i] = y[i] + h * f0[i];
        bool converged = false;
        for (int it = 0; it < c_.max_fixed_point_iterations; ++it) {
          for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (y[i] + z[i]);
          const Vec fm = flow_(mid);
          double delta = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double zi = y[i] + h * fm[i];
            delta = std::max(delta, std::abs(zi - z[i]) / std::max(1.0, std::abs(zi)));
            z[i] = zi;
          }
          if (delta <= c_.fixed_point_tol) {
            converged = true;
            break;
          }
        }
        if (!converged) fail("implicit midpoint fixed-point iteration did not converge", t, y);
        check_state(sys_, PhaseState::unflatten(z));
      } catch (const DomainError& e) {
        fail(std::string("left the domain: ") + e.what(), t, y);
      }

      ++rec_.stats.steps;
      t = lands ? target : t + h;
      y = z;
      guard_singular(t, y);
      if (lands) {
        recorder_.record(t, y);
        ++next;
      } else if (every_step) {
        recorder_.record(t, y);
      }
    }
  }

 private:
  const SystemSpec& sys_;
  const IntegratorControls& c_;
  TrajectoryRecord& rec_;
  Recorder& recorder_;
  Flow flow_;
  bool rejected_last_ = false;
};

}  // namespace

TrajectoryRecord integrate(const SystemSpec& sys, const PhaseState& s0, double t_end,
                           const IntegratorControls& controls, const std::vector<Observable>& extras) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be positive and finite");
  if (!(controls.rtol > 0.0) || !(controls.atol > 0.0)) throw ParameterError("tolerances must be positive");
  check_state(sys, s0);
  for (std::size_t i = 0; i < s0.q.size(); ++i)
    if (sys.b[i] != 0.0 && std::abs(s0.q[i]) < controls.singular_distance)
      throw DomainError("initial q_" + std::to_string(i + 1) + " sits on the centrifugal singularity");

  TrajectoryRecord rec;
  Recorder recorder(sys, extras, rec);
  const Vec y0 = s0.flatten();
  recorder.record(0.0, y0);
  Stepper stepper(sys, controls, rec, recorder);
  if (controls.method == Method::dop853)
    stepper.run_dop853(y0, t_end);
  else
    stepper.run_midpoint(y0, t_end);
  return rec;
}

std::vector<std::string> quantity_names(int dimension) {
  std::vector<std::string> names{"H"};
  for (int m = 2; m <= dimension; ++m) names.push_back("Cl" + std::to_string(m));
  for (int m = 2; m < dimension; ++m) names.push_back("Cr" + std::to_string(m));
  return names;
}

double ConservationReport::max_drift() const {
  double out = 0.0;
  for (const auto& q : quantities) out = std::max(out, q.drift);
  return out;
}

const QuantityDrift& ConservationReport::find(const std::string& name) const {
  for (const auto& q : quantities)
    if (q.name == name) return q;
  throw ParameterError("no conserved quantity named '" + name + "'");
}

ConservationReport conservation_report(const TrajectoryRecord& rec, double tolerance) {
  if (rec.size() == 0) throw ParameterError("empty trajectory record");
  const int n = rec.dimension;
  ConservationReport out;
  out.tolerance = tolerance;

  auto add = [&](const std::string& name, auto&& value_at) {
    const double v0 = value_at(0);
    double drift = 0.0;
    for (std::size_t k = 0; k < rec.size(); ++k) drift = std::max(drift, std::abs(value_at(k) - v0));
    drift /= 1.0 + std::abs(v0);
    out.quantities.push_back({name, v0, drift, drift <= tolerance});
  };

  add("H", [&](std::size_t k) { return rec.energy[k]; });
  for (int m = 2; m <= n; ++m)
    add("Cl" + std::to_string(m), [&](std::size_t k) { return rec.integrals[k].left[m - 2]; });
  for (int m = 2; m < n; ++m)
    add("Cr" + std::to_string(m), [&](std::size_t k) { return rec.integrals[k].right[m - 2]; });
  for (std::size_t e = 0; e < rec.extra_names.size(); ++e)
    add(rec.extra_names[e], [&](std::size_t k) { return rec.extras[e][k]; });

  out.passed = std::all_of(out.quantities.begin(), out.quantities.end(), [](const auto& q) { return q.passed; });
  return out;
}

}  // namespace qms
