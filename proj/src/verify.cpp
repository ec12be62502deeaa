#include "qms/verify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <functional>
#include <json.hpp>
#include <numbers>

#include "qms/algebra.hpp"
#include "qms/coords.hpp"
#include "qms/dynamics.hpp"
#include "qms/potentials.hpp"

namespace qms {

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerifyReport::to_json() const {
  nlohmann::ordered_json root;
  root["suite"] = suite;
  root["seed"] = seed;
  root["passed"] = passed();
  auto& list = root["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json item;
    item["name"] = c.name;
    item["samples"] = c.samples;
    item["max_residual"] = c.max_residual;
    item["tolerance"] = c.tolerance;
    item["passed"] = c.passed;
    if (!c.note.empty()) item["note"] = c.note;
    list.push_back(item);
  }
  return root.dump(2) + "\n";
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"brackets", "involution", "independence",
                                              "coords",   "identities", "green"};
  return names;
}

Interval sampling_radii(const Interval& domain) {
  if (domain.bounded()) {
    const double w = domain.hi - domain.lo;
    return {domain.lo + 0.15 * w, domain.hi - 0.15 * w};
  }
  if (domain.lo <= 0.0) return {0.5, 2.0};
  const double s = std::max(1.0, domain.lo);
  return {domain.lo + 0.3 * s, domain.lo + 2.0 * s};
}

PhaseState random_state(CounterRng& rng, int dimension, const Interval& radii, double p_scale) {
  const auto n = static_cast<std::size_t>(dimension);
  std::vector<double> dir(n);
  for (;;) {
    double norm2 = 0.0;
    for (auto& x : dir) {
      x = rng.uniform(-1.0, 1.0);
      norm2 += x * x;
    }
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) continue;
    if (std::all_of(dir.begin(), dir.end(), [&](double x) { return std::abs(x) >= 0.1 * norm; })) {
      for (auto& x : dir) x /= norm;
      break;
    }
  }
  const double r = rng.uniform(radii.lo, radii.hi);
  PhaseState s{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    s.q[i] = r * dir[i];
    s.p[i] = rng.uniform(-p_scale, p_scale);
  }
  return s;
}

namespace {

// Running maximum of one residual family.
class Check {
 public:
  Check(std::string name, double tolerance) : name_(std::move(name)), tol_(tolerance) {}

  void add(double residual) {
    ++samples_;
    max_ = std::isnan(residual) ? std::numeric_limits<double>::infinity() : std::max(max_, residual);
  }
  void note(std::string text) { note_ = std::move(text); }
  const std::string& name() const { return name_; }

  CheckResult finish(const VerifyOptions& opt) const {
    const double tol = opt.tolerance.value_or(tol_);
    return {name_, samples_, max_, tol, samples_ > 0 && max_ <= tol, note_};
  }

 private:
  std::string name_;
  double tol_;
  int samples_ = 0;
  double max_ = 0.0;
  std::string note_;
};

std::vector<double> random_b(CounterRng& rng, int n, double lo, double hi) {
  std::vector<double> b(static_cast<std::size_t>(n));
  for (auto& x : b) x = rng.uniform(lo, hi);
  return b;
}

std::vector<int> dimensions_for(const VerifyOptions& opt, std::vector<int> defaults) {
  if (opt.config) return {opt.config->dimension};
  return defaults;
}

// Ratio |value| / max(1, |reference|).
double rel(double value, double reference) { return std::abs(value) / std::max(1.0, std::abs(reference)); }

// ---------------------------------------------------------------------------

VerifyReport suite_brackets(const VerifyOptions& opt) {
  VerifyReport rep{"brackets", opt.seed, {}};
  CounterRng rng(opt.seed, 1);
  for (int n : dimensions_for(opt, {2, 3, 4, 6})) {
    const std::string tag = " N=" + std::to_string(n);
    Check c1("{J3,J+} = 2J+" + tag, 1e-5), c2("{J3,J-} = -2J-" + tag, 1e-5), c3("{J-,J+} = 4J3" + tag, 1e-5);
    Check anti("{F,F} = 0" + tag, 1e-9);
    for (int k = 0; k < 100; ++k) {
      const auto b = random_b(rng, n, -3.0, 3.0);
      const PhaseState s = random_state(rng, n, {0.5, 2.0});
      const PhaseFunction jm = [&](const PhaseState& x) { return sl2_realize(x, b).j_minus; };
      const PhaseFunction j3 = [&](const PhaseState& x) { return sl2_realize(x, b).j3; };
      const PhaseFunction jp = [&](const PhaseState& x) { return sl2_realize(x, b).j_plus; };
      const Sl2Triple t = sl2_realize(s, b);
      c1.add(std::abs(poisson_bracket(j3, jp, s) - 2.0 * t.j_plus) / (1.0 + std::abs(t.j_plus)));
      c2.add(std::abs(poisson_bracket(j3, jm, s) + 2.0 * t.j_minus) / (1.0 + std::abs(t.j_plus)));
      c3.add(std::abs(poisson_bracket(jm, jp, s) - 4.0 * t.j3) / (1.0 + std::abs(t.j_plus)));
      anti.add(std::abs(poisson_bracket(jp, jp, s)));
    }
    for (const auto* c : {&c1, &c2, &c3, &anti}) rep.checks.push_back(c->finish(opt));
  }

  // so(N): {J_ij, J_kl} = -(d_jk J_il - d_ik J_jl - d_jl J_ik + d_il J_jk)
  const int n = opt.config ? std::max(3, opt.config->dimension) : 4;
  Check so("so(N) relations N=" + std::to_string(n), 1e-6);
  auto gen = [](int i, int j, const PhaseState& x) {
    if (i == j) return 0.0;
    return i < j ? so_n_generator(i, j, x) : -so_n_generator(j, i, x);
  };
  for (int k = 0; k < 20; ++k) {
    const PhaseState s = random_state(rng, n, {0.5, 2.0});
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = a + 1; b < n; ++b) {
            const PhaseFunction f = [=](const PhaseState& x) { return so_n_generator(i, j, x); };
            const PhaseFunction g = [=](const PhaseState& x) { return so_n_generator(a, b, x); };
            const double expected = -((j == a) * gen(i, b, s) - (i == a) * gen(j, b, s) - (j == b) * gen(i, a, s) +
                                      (i == b) * gen(j, a, s));
            so.add(std::abs(poisson_bracket(f, g, s) - expected));
          }
  }
  rep.checks.push_back(so.finish(opt));
  return rep;
}

// ---------------------------------------------------------------------------

struct NamedSystem {
  std::string label;
  SystemSpec sys;
};

std::vector<NamedSystem> involution_systems(CounterRng& rng, int n, const VerifyOptions& opt) {
  std::vector<NamedSystem> out;
  const std::pair<const char*, Bindings> spaces[] = {
      {"euclidean", {}}, {"darboux3b", {{"k", 1.0}}}, {"taub-nut", {{"m", 1.0}}}};
  for (const auto& [id, params] : spaces) {
    for (const char* kind : {"none", "kc", "oscillator"}) {
      MetricSpec metric = catalog_lookup(id, params);
      const double mu2 = rng.uniform(0.0, 2.0);
      auto b = random_b(rng, n, -3.0, 3.0);
      const double coupling = rng.uniform(0.5, 2.0);
      PotentialSpec u = std::string(kind) == "none" ? PotentialSpec::zero()
                        : std::string(kind) == "kc" ? kc_potential(metric, coupling)
                                                    : oscillator_potential(metric, coupling);
      out.push_back({std::string(id) + "/" + kind, SystemSpec(metric, u, mu2, b, id)});
    }
  }
  if (opt.config) out.push_back({"config", build_system(*opt.config)});
  return out;
}

VerifyReport suite_involution(const VerifyOptions& opt) {
  VerifyReport rep{"involution", opt.seed, {}};
  CounterRng rng(opt.seed, 2);
  const int n = opt.config ? opt.config->dimension : 4;
  for (const auto& [label, sys] : involution_systems(rng, n, opt)) {
    Check h_left("{H,C^(m)} " + label, 1e-5), h_right("{H,C_(m)} " + label, 1e-5);
    Check left("{C^(m),C^(m')} " + label, 1e-5), right("{C_(m),C_(m')} " + label, 1e-5);
    const Interval radii = sampling_radii(sys.domain());
    const auto& b = sys.b;
    const PhaseFunction h = [&](const PhaseState& x) { return hamiltonian(sys, x); };
    auto cl = [&](int m) -> PhaseFunction { return [&b, m](const PhaseState& x) { return casimir_left(m, x, b); }; };
    auto cr = [&](int m) -> PhaseFunction { return [&b, m](const PhaseState& x) { return casimir_right(m, x, b); }; };
    for (int k = 0; k < 50; ++k) {
      const PhaseState s = random_state(rng, n, radii);
      for (int m = 2; m <= n; ++m) h_left.add(poisson_bracket_terms(h, cl(m), s).relative());
      for (int m = 2; m < n; ++m) h_right.add(poisson_bracket_terms(h, cr(m), s).relative());
      for (int m = 2; m <= n; ++m)
        for (int m2 = m + 1; m2 <= n; ++m2) {
          left.add(poisson_bracket_terms(cl(m), cl(m2), s).relative());
          right.add(poisson_bracket_terms(cr(m), cr(m2), s).relative());
        }
    }
    for (const auto* c : {&h_left, &h_right, &left, &right}) {
      auto r = c->finish(opt);
      if (r.samples == 0) continue;  // N = 2 has no mutual pairs
      rep.checks.push_back(r);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<PhaseFunction> integral_functions(const SystemSpec& sys) {
  const int n = sys.dimension();
  std::vector<PhaseFunction> fns{[&sys](const PhaseState& x) { return hamiltonian(sys, x); }};
  for (int m = 2; m <= n; ++m)
    fns.push_back([&sys, m](const PhaseState& x) { return casimir_left(m, x, sys.b); });
  for (int m = 2; m < n; ++m)
    fns.push_back([&sys, m](const PhaseState& x) { return casimir_right(m, x, sys.b); });
  return fns;
}

VerifyReport suite_independence(const VerifyOptions& opt) {
  VerifyReport rep{"independence", opt.seed, {}};
  CounterRng rng(opt.seed, 3);

  std::vector<NamedSystem> systems;
  const int n = opt.config ? opt.config->dimension : 3;
  {
    std::vector<double> b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = i + 1.0;
    MetricSpec metric = catalog_lookup("taub-nut", {{"m", 1.0}});
    PotentialSpec u = kc_potential(metric, 1.0);
    systems.push_back({"taub-nut/kc", SystemSpec(metric, u, 1.0, b, "taub-nut")});
    MetricSpec flat = catalog_lookup("euclidean");
    systems.push_back({"euclidean/oscillator", SystemSpec(flat, oscillator_potential(flat, 1.0), 1.0, b, "euclidean")});
  }
  if (opt.config) systems.push_back({"config", build_system(*opt.config)});

  for (const auto& [label, sys] : systems) {
    const auto fns = integral_functions(sys);
    const int expected = static_cast<int>(fns.size());
    int full = 0;
    constexpr int kStates = 20;
    const Interval radii = sampling_radii(sys.domain());
    for (int k = 0; k < kStates; ++k) {
      const PhaseState s = random_state(rng, n, radii);
      if (independence_rank(fns, s) == expected) ++full;
    }
    Check c("rank " + std::to_string(expected) + " " + label, 0.05);
    c.add(1.0 - static_cast<double>(full) / kStates);
    c.note(std::to_string(full) + "/" + std::to_string(kStates) + " states at full rank");
    rep.checks.push_back(c.finish(opt));

    Check dup("duplicate keeps rank " + label, 0.0);
    for (int k = 0; k < 5; ++k) {
      const PhaseState s = random_state(rng, n, radii);
      auto with_dup = fns;
      with_dup.push_back(fns.front());
      dup.add(std::abs(independence_rank(with_dup, s) - independence_rank(fns, s)));
    }
    rep.checks.push_back(dup.finish(opt));
  }

  // N = 2: {H, C^(2)}
  {
    MetricSpec metric = catalog_lookup("darboux3b", {{"k", 1.0}});
    SystemSpec sys(metric, kc_potential(metric, 1.0), 0.5, {1.0, 2.0}, "darboux3b");
    const auto fns = integral_functions(sys);
    int full = 0;
    for (int k = 0; k < 20; ++k)
      if (independence_rank(fns, random_state(rng, 2, sampling_radii(sys.domain()))) == 2) ++full;
    Check c("rank 2 N=2 darboux3b/kc", 0.05);
    c.add(1.0 - full / 20.0);
    c.note(std::to_string(full) + "/20 states at full rank");
    rep.checks.push_back(c.finish(opt));
  }
  return rep;
}

// ---------------------------------------------------------------------------

// Spherical variables packed as q = (r, theta), p = (p_r, p_theta).
PhaseState pack(const SphericalPhaseState& s) {
  PhaseState x;
  x.q.push_back(s.r);
  x.q.insert(x.q.end(), s.theta.begin(), s.theta.end());
  x.p.push_back(s.p_r);
  x.p.insert(x.p.end(), s.p_theta.begin(), s.p_theta.end());
  return x;
}

SphericalPhaseState unpack(const PhaseState& x) {
  SphericalPhaseState s;
  s.r = x.q.front();
  s.theta.assign(x.q.begin() + 1, x.q.end());
  s.p_r = x.p.front();
  s.p_theta.assign(x.p.begin() + 1, x.p.end());
  return s;
}

// dq/dt from (rdot, thetadot) by differentiating the position map term by term.
std::vector<double> position_velocity(const SphericalPhaseState& s, double rdot, const std::vector<double>& thdot) {
  const int n = s.dimension();
  // q_j / r = cos(th_j) prod_{k<j} sin(th_k) for j < N, prod_{k<N} sin(th_k) for j = N (1-based).
  auto factor = [&](int j, int skip) {
    double out = 1.0;
    bool depends = skip == 0;
    for (int k = 1; k < j && k < n; ++k) {
      const double th = s.theta[static_cast<std::size_t>(k - 1)];
      out *= k == skip ? std::cos(th) : std::sin(th);
      depends = depends || k == skip;
    }
    if (j < n) {
      const double th = s.theta[static_cast<std::size_t>(j - 1)];
      out *= j == skip ? -std::sin(th) : std::cos(th);
      depends = depends || j == skip;
    }
    return depends ? out : 0.0;
  };
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  for (int j = 1; j <= n; ++j) {
    double acc = rdot * factor(j, 0);
    for (int l = 1; l < n; ++l) acc += s.r * factor(j, l) * thdot[static_cast<std::size_t>(l - 1)];
    v[static_cast<std::size_t>(j - 1)] = acc;
  }
  return v;
}

VerifyReport suite_coords(const VerifyOptions& opt) {
  VerifyReport rep{"coords", opt.seed, {}};
  CounterRng rng(opt.seed, 4);

  // Canonicity of the chart.
  for (int n : {2, 3, 4}) {
    Check c("canonical brackets N=" + std::to_string(n), 1e-6);
    for (int k = 0; k < 10; ++k) {
      const SphericalPhaseState sph = from_cartesian(random_state(rng, n, {0.5, 2.0}));
      const PhaseState x = pack(sph);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const PhaseFunction qi = [i](const PhaseState& y) { return to_cartesian(unpack(y)).q[i]; };
          const PhaseFunction qj = [j](const PhaseState& y) { return to_cartesian(unpack(y)).q[j]; };
          const PhaseFunction pi = [i](const PhaseState& y) { return to_cartesian(unpack(y)).p[i]; };
          const PhaseFunction pj = [j](const PhaseState& y) { return to_cartesian(unpack(y)).p[j]; };
          c.add(std::abs(poisson_bracket(qi, pj, x) - (i == j ? 1.0 : 0.0)));
          c.add(std::abs(poisson_bracket(qi, qj, x)));
          c.add(std::abs(poisson_bracket(pi, pj, x)));
        }
    }
    rep.checks.push_back(c.finish(opt));
  }

  Check round("round trip", 1e-12), cas("spherical vs cartesian C_(m)", 1e-10), chain("angular chain", 1e-12);
  Check gens("spherical generators", 1e-12), radial_res("J+ radial form", 1e-12), radial("radial reduction", 1e-12);
  Check kinetic("kinetic invariance", 1e-12), legendre("Legendre consistency", 1e-12);
  Check monopole("monopole absorption", 1e-12);
  for (int n : {2, 3, 4}) {
    for (int k = 0; k < 20; ++k) {
      const PhaseState x = random_state(rng, n, {0.5, 2.0});
      const auto b = random_b(rng, n, -3.0, 3.0);
      const SphericalPhaseState s = from_cartesian(x);
      const PhaseState back = to_cartesian(s);
      const SphericalPhaseState again = from_cartesian(back);
      double err = std::abs(again.r - s.r) + std::abs(again.p_r - s.p_r);
      for (std::size_t i = 0; i < s.theta.size(); ++i)
        err = std::max({err, std::abs(again.theta[i] - s.theta[i]), std::abs(again.p_theta[i] - s.p_theta[i])});
      for (int i = 0; i < n; ++i)
        err = std::max({err, std::abs(back.q[i] - x.q[i]), std::abs(back.p[i] - x.p[i])});
      round.add(err);

      const auto ch = angular_chain(s, b);
      for (int m = 2; m <= n; ++m) {
        const double sc = spherical_casimir(m, s, b);
        cas.add(std::abs(sc - casimir_right(m, x, b)));
        chain.add(rel(ch[static_cast<std::size_t>(m - 2)] - sc, sc));
      }

      const auto g = spherical_generators(s, b);
      const auto t = sl2_realize(x, b);
      gens.add(std::max({rel(g.triple.j_minus - t.j_minus, t.j_minus), rel(g.triple.j3 - t.j3, t.j3),
                         rel(g.triple.j_plus - t.j_plus, t.j_plus)}));
      radial_res.add(g.radial_residual / std::max(1.0, std::abs(g.triple.j_plus)));

      MetricSpec metric = catalog_lookup("darboux3b", {{"k", 1.0}});
      const double mu2 = rng.uniform(0.0, 2.0);
      SystemSpec sys(metric, kc_potential(metric, 1.3), mu2, b, "darboux3b");
      const double full = hamiltonian(sys, x);
      radial.add(rel(radial_hamiltonian(s.r, s.p_r, g.c_n, mu2, sys.metric, sys.potential) - full, full));

      const double f = metric.conformal_factor(s.r);
      const double t_cart = x.p_squared() / (2 * f * f);
      const double t_sph = (s.p_r * s.p_r + angular_momentum_squared(s) / (s.r * s.r)) / (2 * f * f);
      kinetic.add(rel(t_cart - t_sph, t_cart));

      // Momenta from random velocities: p_r = f^2 rdot, p_theta_j = f^2 r^2 prod_{k<j} sin^2 thdot_j.
      const double rdot = rng.uniform(-1.0, 1.0);
      std::vector<double> thdot(s.theta.size());
      for (auto& v : thdot) v = rng.uniform(-1.0, 1.0);
      SphericalPhaseState lg = s;
      lg.p_r = f * f * rdot;
      double prod = 1.0;
      for (std::size_t j = 0; j < thdot.size(); ++j) {
        lg.p_theta[j] = f * f * s.r * s.r * prod * thdot[j];
        prod *= std::sin(s.theta[j]) * std::sin(s.theta[j]);
      }
      const PhaseState mapped = to_cartesian(lg);
      const auto qdot = position_velocity(s, rdot, thdot);
      double lerr = 0.0;
      for (int i = 0; i < n; ++i) lerr = std::max(lerr, rel(mapped.p[i] - f * f * qdot[i], mapped.p[i]));
      legendre.add(lerr);

      // H(mu2 = x, L^2 = y) equals H(mu2 = 0, L^2 = x + y) at matched radial data.
      const std::vector<double> zero_b(static_cast<std::size_t>(n), 0.0);
      SystemSpec with(metric, kc_potential(metric, 1.3), mu2, zero_b, "darboux3b");
      SystemSpec without(metric, kc_potential(metric, 1.3), 0.0, zero_b, "darboux3b");
      const double l2 = angular_momentum_squared(s);
      if (l2 > 1e-6) {
        SphericalPhaseState boosted = s;
        const double factor = std::sqrt((l2 + mu2) / l2);
        for (auto& v : boosted.p_theta) v *= factor;
        const double h1 = hamiltonian(with, x);
        monopole.add(rel(hamiltonian(without, to_cartesian(boosted)) - h1, h1));
      }
    }
  }
  for (const auto* c : {&round, &cas, &chain, &gens, &radial_res, &radial, &kinetic, &legendre, &monopole})
    rep.checks.push_back(c->finish(opt));

  // {J+, L^2} closed form and the symmetry-breaking signature.
  Check jl("{J+,L^2} closed form N=3", 1e-5), hc("{H,C_(N)} with b != 0", 1e-5);
  Check hl("|{H,L^2}| > 1e-3 with b != 0", 0.0);
  {
    MetricSpec metric = catalog_lookup("taub-nut", {{"m", 1.0}});
    for (int k = 0; k < 20; ++k) {
      std::vector<double> b = random_b(rng, 3, 0.5, 3.0);
      SystemSpec sys(metric, kc_potential(metric, 1.0), 0.7, b, "taub-nut");
      const PhaseState x = random_state(rng, 3, {0.5, 2.0});
      const PhaseFunction jp = [&](const PhaseState& y) { return sl2_realize(y, b).j_plus; };
      const PhaseFunction l2 = [](const PhaseState& y) {
        return y.q_squared() * y.p_squared() - y.q_dot_p() * y.q_dot_p();
      };
      const PhaseFunction h = [&](const PhaseState& y) { return hamiltonian(sys, y); };
      const PhaseFunction cn = [&](const PhaseState& y) { return casimir_right(3, y, b); };
      const double closed = j_plus_l2_bracket(from_cartesian(x), b);
      jl.add(rel(poisson_bracket(jp, l2, x) - closed, closed));
      hc.add(poisson_bracket_terms(h, cn, x).relative());
      hl.add(std::abs(poisson_bracket(h, l2, x)) > 1e-3 ? 0.0 : 1.0);
    }
  }
  for (const auto* c : {&jl, &hc, &hl}) rep.checks.push_back(c->finish(opt));
  return rep;
}

// ---------------------------------------------------------------------------

double wm_compact(const PhaseState& s, Rational nu, double a, double b, double c, double d, double mu2) {
  const double r = s.radius();
  const double inv = 1.0 / nu.value();
  return std::pow(r, 2.0 - inv) / (2.0 * (a + b * std::pow(r, inv))) *
         (s.p_squared() + mu2 / (r * r) + mu2 * c * std::pow(r, inv - 2.0) + mu2 * d * std::pow(r, 2.0 * inv - 2.0));
}

VerifyReport suite_identities(const VerifyOptions& opt) {
  VerifyReport rep{"identities", opt.seed, {}};
  CounterRng rng(opt.seed, 5);
  const Rational nus[] = {Rational(1), Rational(3, 2), Rational(2), Rational(1, 2), Rational(2, 3)};

  std::deque<Check> checks;
  auto check = [&](const std::string& name) -> Check& {
    for (auto& c : checks)
      if (c.name() == name) return c;
    checks.emplace_back(name, 1e-10);
    return checks.back();
  };

  for (int k = 0; k < 20; ++k) {
    IdentityParams ip;
    ip.nu = nus[rng.next() % 5];
    ip.a = rng.uniform(0.5, 2.0);
    ip.b = rng.uniform(0.5, 3.0);
    ip.c = rng.uniform(-1.0, 1.0);
    ip.d = rng.uniform(-1.0, 1.0);
    ip.mu2 = rng.uniform(0.1, 2.0);
    ip.beta = rng.uniform(-2.0, 2.0);
    ip.gamma = rng.uniform(-2.0, 2.0);
    ip.m = rng.uniform(0.5, 2.0);
    const PhaseState s = random_state(rng, 3, {1.2, 3.0});
    for (const auto& r : decomposition_identities(s, ip)) check(r.name).add(r.residual);

    // Assembled systems against their literal formulas.
    const double mu2 = ip.mu2;
    const double r = s.radius();
    const double p2 = s.p_squared();
    SystemSpec tn = named_system("taub-nut-system", {{"m", ip.m}, {"mu2", mu2}});
    const double m4 = 4.0 * ip.m;
    check("taub-nut-system vs second line")
        .add(std::abs(hamiltonian(tn, s) - (p2 / (2.0 * (1.0 + m4 / r)) + mu2 / (2.0 * m4 * m4) * (1.0 + m4 / r))));

    SystemSpec mf = named_system("multifold-kepler",
                                 {{"nu", ip.nu.value()}, {"a", ip.a}, {"b", ip.b}, {"c", ip.c}, {"d", ip.d}, {"mu2", mu2}});
    check("multifold-kepler vs compact form")
        .add(std::abs(hamiltonian(mf, s) - wm_compact(s, ip.nu, ip.a, ip.b, ip.c, ip.d, mu2)));

    const double alpha = rng.uniform(0.5, 2.0);
    SystemSpec mk = named_system("mic-kepler", {{"alpha", alpha}, {"mu2", mu2}});
    const double mk_literal = 0.5 * p2 - alpha / r + mu2 / (2.0 * r * r);
    check("mic-kepler vs literal").add(std::abs(hamiltonian(mk, s) - mk_literal));
    SystemSpec limit = named_system(
        "multifold-kepler", {{"nu", 1.0}, {"a", 0.0}, {"b", 1.0}, {"c", -2.0 * alpha / mu2}, {"d", 0.0}, {"mu2", mu2}});
    check("multifold limit vs mic-kepler").add(std::abs(hamiltonian(limit, s) - mk_literal));

    // Curved MIC-Kepler: 4 H(alpha) equals the table form with KC strength 4 alpha.
    const PhaseState inner = random_state(rng, 3, {0.2, 0.8});
    const double ri = inner.radius();
    const double q2 = ri * ri;
    const double pi2 = inner.p_squared();
    SystemSpec sph = named_system("mic-kepler-spherical", {{"alpha", alpha}, {"mu2", mu2}});
    const double wi = 0.5 * (1 + q2) * (1 + q2) * pi2 + 4.0 * alpha * (q2 - 1) / ri + mu2 * (1 + q2) * (1 + q2) / (2 * q2);
    check("mic-kepler-spherical x4 vs table form").add(std::abs(4.0 * hamiltonian(sph, inner) - wi));
    SystemSpec hyp = named_system("mic-kepler-hyperbolic", {{"alpha", alpha}, {"mu2", mu2}});
    const double wj = 0.5 * (1 - q2) * (1 - q2) * pi2 - 4.0 * alpha * (q2 + 1) / ri + mu2 * (1 - q2) * (1 - q2) / (2 * q2);
    check("mic-kepler-hyperbolic x4 vs table form").add(std::abs(4.0 * hamiltonian(hyp, inner) - wj));
  }
  for (const auto& c : checks) rep.checks.push_back(c.finish(opt));
  return rep;
}

// ---------------------------------------------------------------------------

struct TableRow {
  std::string label;
  std::string id;
  Bindings params;
  std::function<double(double)> kc;   // alpha = 1
  std::function<double(double)> osc;  // beta = 1
};

std::vector<TableRow> table_rows() {
  using std::cos;
  using std::log;
  using std::pow;
  using std::sqrt;
  const double k = 1.0, km = -1.0, a4 = 2.0, a4b = 0.5, m = 1.0, na = 1.0, nb = 2.0, nu = 1.5, nu0 = 2.0;
  return {
      {"euclidean", "euclidean", {}, [](double r) { return -1 / r; }, [](double r) { return r * r; }},
      {"spherical", "spherical", {}, [](double r) { return (r * r - 1) / r; },
       [](double r) { return r * r / ((r * r - 1) * (r * r - 1)); }},
      {"hyperbolic", "hyperbolic", {}, [](double r) { return -(r * r + 1) / r; },
       [](double r) { return r * r / ((r * r + 1) * (r * r + 1)); }},
      {"darboux1", "darboux1", {}, [](double r) { return sqrt(log(r)); }, [](double r) { return 1 / log(r); }},
      {"darboux2", "darboux2", {}, [](double r) { return sqrt(1 + log(r) * log(r)); },
       [](double r) { return 1 / (1 + log(r) * log(r)); }},
      {"darboux3a", "darboux3a", {}, [](double r) { return sqrt(1 + r); }, [](double r) { return 1 / (1 + r); }},
      {"darboux3b k=1", "darboux3b", {{"k", k}}, [=](double r) { return sqrt(k + r * r) / r; },
       [=](double r) { return r * r / (k + r * r); }},
      {"darboux3b k=-1", "darboux3b", {{"k", km}}, [=](double r) { return sqrt(km + r * r) / r; },
       [=](double r) { return r * r / (km + r * r); }},
      {"darboux4 a=2", "darboux4", {{"a", a4}}, [=](double r) { return sqrt(a4 + cos(log(r))); },
       [=](double r) { return 1 / (a4 + cos(log(r))); }},
      {"darboux4 a=0.5", "darboux4", {{"a", a4b}}, [=](double r) { return sqrt(a4b + cos(log(r))); },
       [=](double r) { return 1 / (a4b + cos(log(r))); }},
      {"taub-nut", "taub-nut", {{"m", m}}, [=](double r) { return sqrt(4 * m / r + 1); },
       [=](double r) { return r / (4 * m + r); }},
      {"nu-fold", "nu-fold", {{"a", na}, {"b", nb}, {"nu", nu}},
       [=](double r) { return sqrt(na * pow(r, -1 / nu) + nb); },
       [=](double r) { return 1 / (na * pow(r, -1 / nu) + nb); }},
      {"nu-fold-a0", "nu-fold-a0", {{"nu", nu0}}, [=](double r) { return -pow(r, -1 / nu0); },
       [=](double r) { return pow(r, 2 / nu0); }},
  };
}

double harmonic_residual(const MetricSpec& metric, const std::function<double(double)>& du, double r) {
  auto g = [&](double x) { return x * x * metric.conformal_factor(x) * du(x); };
  const Interval dom = metric.domain();
  const double h = 0.1 * std::min({r - dom.lo, dom.hi - r, r});
  auto d = [&](double step) { return (g(r + step) - g(r - step)) / (2.0 * step); };
  const double outer = (4.0 * d(h / 2.0) - d(h)) / 3.0;
  const double f = metric.conformal_factor(r);
  return outer / (r * r * f * f * f);
}

VerifyReport suite_green(const VerifyOptions& opt) {
  VerifyReport rep{"green", opt.seed, {}};
  Check harm("harmonicity", 1e-7), affine("quadrature affine match", 1e-8);
  Check kc("KC column", 1e-12), osc("oscillator column", 1e-12);
  const double alpha = 1.7;
  const double beta = 0.6;

  for (const auto& row : table_rows()) {
    const MetricSpec metric = catalog_lookup(row.id, row.params);
    const auto closed = green_closed_form(metric);
    if (!closed) throw Error("missing closed form for " + row.label);
    const Expr du = closed->derivative();

    for (double r : metric.domain().samples(32))
      harm.add(std::abs(harmonic_residual(metric, [&](double x) { return du.evaluate(x); }, r)));

    // Least-squares fit quadrature = s * closed + t on 16 points.
    const auto pts = metric.domain().samples(16);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs, ys;
    for (double r : pts) {
      const double x = closed->evaluate(r);
      const double y = green_function_quadrature(metric, r);
      xs.push_back(x);
      ys.push_back(y);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double np = static_cast<double>(pts.size());
    const double slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
    const double shift = (sy - slope * sx) / np;
    for (std::size_t i = 0; i < xs.size(); ++i) affine.add(std::abs(ys[i] - (slope * xs[i] + shift)));

    const PotentialSpec ukc = kc_potential(metric, alpha);
    for (double r : metric.domain().samples(32)) {
      const double expect = alpha * row.kc(r);
      kc.add(rel(ukc.value(r) - expect, expect));
    }
    const PotentialSpec uo = oscillator_potential(metric, beta);
    for (double r : uo.domain().samples(32)) {
      const double expect = beta * row.osc(r);
      osc.add(rel(uo.value(r) - expect, expect));
    }
  }
  for (const auto* c : {&harm, &affine, &kc, &osc}) rep.checks.push_back(c->finish(opt));

  // darboux3b with k = 0 has no registered form: quadrature against -1/(2 r^2).
  {
    const MetricSpec metric = catalog_lookup("darboux3b", {{"k", 0.0}});
    Check c("darboux3b k=0 quadrature", 1e-8);
    const double r0 = metric.domain().reference_point();
    for (double r : metric.domain().samples(16))
      c.add(std::abs(green_function(metric, r) - (-1.0 / (2 * r * r) + 1.0 / (2 * r0 * r0))));
    Check h("darboux3b k=0 harmonicity on [0.1, 10]", 1e-7);
    for (double r : Interval{0.1, 10.0}.samples(32))
      h.add(std::abs(harmonic_residual(
          metric, [&](double x) { return 1.0 / (x * x * metric.conformal_factor(x)); }, r)));
    rep.checks.push_back(c.finish(opt));
    rep.checks.push_back(h.finish(opt));
  }

  // The sphere's U vanishes at r = 1; the oscillator keeps (0, 1).
  {
    const PotentialSpec uo = oscillator_potential(catalog_lookup("spherical"), 1.0);
    Check c("spherical oscillator domain (0,1)", 1e-12);
    c.add(std::abs(uo.domain().lo) + std::abs(uo.domain().hi - 1.0));
    rep.checks.push_back(c.finish(opt));
  }

  if (opt.config && opt.config->space) {
    const SystemSpec sys = build_system(*opt.config);
    Check c("harmonicity config space", 1e-7);
    const GreenFunctionTable table(sys.metric);
    for (double r : sys.metric.domain().samples(32))
      c.add(std::abs(harmonic_residual(sys.metric, [&](double x) { return table.derivative(x); }, r)));
    rep.checks.push_back(c.finish(opt));
  }
  return rep;
}

}  // namespace

VerifyReport run_verify(const std::string& suite, const VerifyOptions& options) {
  if (suite == "brackets") return suite_brackets(options);
  if (suite == "involution") return suite_involution(options);
  if (suite == "independence") return suite_independence(options);
  if (suite == "coords") return suite_coords(options);
  if (suite == "identities") return suite_identities(options);
  if (suite == "green") return suite_green(options);
  throw ConfigError("unknown verify suite '" + suite + "'");
}

}  // namespace qms
