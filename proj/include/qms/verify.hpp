#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qms/config.hpp"
#include "qms/geometry.hpp"
#include "qms/phase.hpp"
#include "qms/rng.hpp"

namespace qms {

struct CheckResult {
  std::string name;
  int samples = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

struct VerifyReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool passed() const;
  /// Deterministic JSON text: fixed key order, shortest round-trip numbers.
  std::string to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  std::optional<double> tolerance;  // replaces every check's tolerance
  std::optional<RunConfig> config;  // adds the configured system and dimension
};

const std::vector<std::string>& verify_suites();

/// Runs brackets | involution | independence | coords | identities | green.
/// Throws ConfigError for an unknown suite.
VerifyReport run_verify(const std::string& suite, const VerifyOptions& options);

/// Radii well inside `domain` for random sampling.
Interval sampling_radii(const Interval& domain);

/// Random point with |q| uniform in `radii`, every |q_i| >= 0.1 |q| and
/// momenta uniform in [-p_scale, p_scale].
PhaseState random_state(CounterRng& rng, int dimension, const Interval& radii, double p_scale = 1.0);

}  // namespace qms
