#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qms/coords.hpp"
#include "qms/dynamics.hpp"
#include "qms/error.hpp"
#include "qms/geometry.hpp"
#include "qms/potentials.hpp"

namespace qms {

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SpaceConfig {
  std::optional<std::string> id;  // catalog id
  std::optional<std::string> f;   // custom conformal factor
  Bindings params;
  Interval domain;  // custom spaces only
};

struct PotentialConfig {
  std::string type = "none";  // none | kc | oscillator | shifted-oscillator | custom
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  std::string u;  // custom U(r)
  Bindings params;
};

struct NamedSystemConfig {
  std::string id;
  Bindings params;
};

struct RunConfig {
  int dimension = 0;
  std::optional<SpaceConfig> space;
  std::optional<PotentialConfig> potential;
  std::optional<NamedSystemConfig> system;
  double mu2 = 0.0;
  std::vector<double> b;
  std::optional<PhaseState> cartesian;
  std::optional<SphericalPhaseState> spherical;
  IntegratorControls integrator;
  double t_end = 0.0;
  std::uint64_t seed = 42;
  double tolerance = 1e-7;
  std::optional<std::string> out_dir;
};

/// Parses JSON text. Unknown keys, wrong types and inconsistent clauses
/// throw ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Assembles the system; catalog and parameter failures become ConfigError.
SystemSpec build_system(const RunConfig& config);

/// Initial state in generic coordinates, validated against the system.
PhaseState initial_state(const RunConfig& config, const SystemSpec& sys);

}  // namespace qms
