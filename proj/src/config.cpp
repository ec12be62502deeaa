#include "qms/config.hpp"

#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

namespace qms {

namespace {

using json = nlohmann::json;

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + " must be a string");
  return v.get<std::string>();
}

Bindings bindings(const json& v, const std::string& where) {
  if (!v.is_object()) throw ConfigError(where + " must be an object of numbers");
  Bindings out;
  for (const auto& item : v.items()) out[item.key()] = number(item.value(), where + "." + item.key());
  return out;
}

SpaceConfig parse_space(const json& v) {
  allow_keys(v, "space", {"id", "f", "params", "domain"});
  SpaceConfig out;
  if (v.contains("id")) out.id = text(v["id"], "space.id");
  if (v.contains("f")) out.f = text(v["f"], "space.f");
  if (out.id.has_value() == out.f.has_value()) throw ConfigError("space needs exactly one of 'id' or 'f'");
  if (v.contains("params")) out.params = bindings(v["params"], "space.params");
  if (v.contains("domain")) {
    if (out.id) throw ConfigError("space.domain applies to custom spaces only");
    const json& d = v["domain"];
    if (!d.is_array() || d.size() != 2) throw ConfigError("space.domain must be [lo, hi] (hi may be null)");
    out.domain.lo = number(d[0], "space.domain[0]");
    out.domain.hi = d[1].is_null() ? std::numeric_limits<double>::infinity() : number(d[1], "space.domain[1]");
  }
  return out;
}

PotentialConfig parse_potential(const json& v) {
  allow_keys(v, "potential", {"type", "alpha", "beta", "gamma", "U", "params"});
  PotentialConfig out;
  if (!v.contains("type")) throw ConfigError("potential.type is required");
  out.type = text(v["type"], "potential.type");
  auto need = [&](const char* key) {
    if (!v.contains(key)) throw ConfigError("potential type '" + out.type + "' requires '" + key + "'");
    return number(v[key], std::string("potential.") + key);
  };
  auto forbid_except = [&](std::initializer_list<const char*> keys) {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& item : v.items())
      if (item.key() != "type" && !ok.count(item.key()))
        throw ConfigError("key '" + item.key() + "' does not apply to potential type '" + out.type + "'");
  };
  if (out.type == "none") {
    forbid_except({});
  } else if (out.type == "kc") {
    forbid_except({"alpha"});
    out.alpha = need("alpha");
  } else if (out.type == "oscillator") {
    forbid_except({"beta"});
    out.beta = need("beta");
  } else if (out.type == "shifted-oscillator") {
    forbid_except({"beta", "gamma"});
    out.beta = need("beta");
    out.gamma = need("gamma");
  } else if (out.type == "custom") {
    forbid_except({"U", "params"});
    if (!v.contains("U")) throw ConfigError("potential type 'custom' requires 'U'");
    out.u = text(v["U"], "potential.U");
    if (v.contains("params")) out.params = bindings(v["params"], "potential.params");
  } else {
    throw ConfigError("unknown potential type '" + out.type + "'");
  }
  return out;
}

void parse_initial(const json& v, RunConfig& out) {
  if (!v.is_object()) throw ConfigError("initial must be an object");
  if (v.contains("q") || v.contains("p")) {
    allow_keys(v, "initial", {"q", "p"});
    if (!v.contains("q") || !v.contains("p")) throw ConfigError("initial needs both 'q' and 'p'");
    out.cartesian = PhaseState(numbers(v["q"], "initial.q"), numbers(v["p"], "initial.p"));
  } else {
    allow_keys(v, "initial", {"r", "theta", "p_r", "p_theta"});
    for (const char* key : {"r", "theta", "p_r", "p_theta"})
      if (!v.contains(key)) throw ConfigError(std::string("spherical initial state needs '") + key + "'");
    SphericalPhaseState s;
    s.r = number(v["r"], "initial.r");
    s.theta = numbers(v["theta"], "initial.theta");
    s.p_r = number(v["p_r"], "initial.p_r");
    s.p_theta = numbers(v["p_theta"], "initial.p_theta");
    out.spherical = s;
  }
}

void parse_integrator(const json& v, IntegratorControls& c) {
  allow_keys(v, "integrator", {"method", "rtol", "atol", "step", "max_steps"});
  if (v.contains("method")) {
    const std::string m = text(v["method"], "integrator.method");
    if (m == "dop853")
      c.method = Method::dop853;
    else if (m == "implicit-midpoint")
      c.method = Method::implicit_midpoint;
    else
      throw ConfigError("unknown integrator method '" + m + "' (dop853 | implicit-midpoint)");
  }
  if (v.contains("rtol")) c.rtol = number(v["rtol"], "integrator.rtol");
  if (v.contains("atol")) c.atol = number(v["atol"], "integrator.atol");
  if (v.contains("step")) c.step = number(v["step"], "integrator.step");
  if (v.contains("max_steps")) {
    const double n = number(v["max_steps"], "integrator.max_steps");
    if (!(n >= 1.0)) throw ConfigError("integrator.max_steps must be at least 1");
    c.max_steps = static_cast<std::int64_t>(n);
  }
  if (!(c.rtol > 0.0) || !(c.atol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (!(c.step > 0.0)) throw ConfigError("integrator.step must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(root, "config",
             {"dimension", "space", "potential", "system", "mu2", "b", "initial", "integrator", "t_end",
              "sample_interval", "seed", "tolerance", "output"});

  RunConfig out;
  if (!root.contains("dimension")) throw ConfigError("'dimension' is required");
  if (!root["dimension"].is_number_integer()) throw ConfigError("dimension must be an integer");
  out.dimension = root["dimension"].get<int>();
  if (out.dimension < 2) throw ConfigError("dimension must be at least 2");

  if (root.contains("system")) {
    for (const char* key : {"space", "potential", "mu2"})
      if (root.contains(key))
        throw ConfigError(std::string("'") + key + "' cannot be combined with a named 'system'");
    const json& s = root["system"];
    allow_keys(s, "system", {"id", "params"});
    if (!s.contains("id")) throw ConfigError("system.id is required");
    NamedSystemConfig sys{text(s["id"], "system.id"), {}};
    if (s.contains("params")) sys.params = bindings(s["params"], "system.params");
    out.system = sys;
  } else {
    if (!root.contains("space")) throw ConfigError("either 'space' with 'potential' or 'system' is required");
    if (!root.contains("potential")) throw ConfigError("'potential' is required (use {\"type\": \"none\"})");
    out.space = parse_space(root["space"]);
    out.potential = parse_potential(root["potential"]);
    if (root.contains("mu2")) out.mu2 = number(root["mu2"], "mu2");
    if (!(out.mu2 >= 0.0)) throw ConfigError("mu2 must be nonnegative");
  }

  if (root.contains("b")) {
    out.b = numbers(root["b"], "b");
    if (static_cast<int>(out.b.size()) != out.dimension)
      throw ConfigError("b has " + std::to_string(out.b.size()) + " entries, dimension is " +
                        std::to_string(out.dimension));
  } else {
    out.b.assign(static_cast<std::size_t>(out.dimension), 0.0);
  }

  if (root.contains("initial")) parse_initial(root["initial"], out);
  if (root.contains("integrator")) parse_integrator(root["integrator"], out.integrator);
  if (root.contains("t_end")) {
    out.t_end = number(root["t_end"], "t_end");
    if (!(out.t_end > 0.0)) throw ConfigError("t_end must be positive");
  }
  if (root.contains("sample_interval")) {
    out.integrator.sample_interval = number(root["sample_interval"], "sample_interval");
    if (out.integrator.sample_interval < 0.0) throw ConfigError("sample_interval must be nonnegative");
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    out.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("tolerance")) {
    out.tolerance = number(root["tolerance"], "tolerance");
    if (!(out.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  }
  if (root.contains("output")) {
    allow_keys(root["output"], "output", {"dir"});
    if (root["output"].contains("dir")) out.out_dir = text(root["output"]["dir"], "output.dir");
  }
  return out;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

SystemSpec build_system(const RunConfig& config) {
  try {
    if (config.system) return named_system(config.system->id, config.system->params, config.dimension, config.b);

    const SpaceConfig& sc = *config.space;
    std::optional<MetricSpec> metric;
    if (sc.id) {
      metric = catalog_lookup(*sc.id, sc.params);
    } else {
      std::set<std::string> names;
      for (const auto& [k, v] : sc.params) names.insert(k);
      metric = MetricSpec("custom", parse(*sc.f, names), sc.params, sc.domain, "user-defined");
    }

    const PotentialConfig& pc = *config.potential;
    std::optional<PotentialSpec> u;
    if (pc.type == "none") {
      u = PotentialSpec::zero();
    } else if (pc.type == "kc") {
      u = kc_potential(*metric, pc.alpha);
    } else if (pc.type == "oscillator") {
      u = oscillator_potential(*metric, pc.beta);
    } else if (pc.type == "shifted-oscillator") {
      u = shifted_oscillator_potential(*metric, pc.beta, pc.gamma);
    } else {
      std::set<std::string> names;
      for (const auto& [k, v] : pc.params) names.insert(k);
      u = PotentialSpec("custom", parse(pc.u, names).bind(pc.params), Provenance::user);
    }
    return SystemSpec(std::move(*metric), std::move(*u), config.mu2, config.b, sc.id ? *sc.id : "custom");
  } catch (const ConfigError&) {
    throw;
  } catch (const ParseError& e) {
    throw ConfigError(std::string("expression: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

PhaseState initial_state(const RunConfig& config, const SystemSpec& sys) {
  PhaseState s;
  if (config.cartesian) {
    s = *config.cartesian;
  } else if (config.spherical) {
    try {
      s = to_cartesian(*config.spherical);
    } catch (const Error& e) {
      throw ConfigError(std::string("initial spherical state: ") + e.what());
    }
  } else {
    throw ConfigError("'initial' state is required");
  }
  if (s.dimension() != config.dimension || s.p.size() != s.q.size())
    throw ConfigError("initial state dimension differs from 'dimension'");
  try {
    check_state(sys, s);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("initial state: ") + e.what());
  }
  return s;
}

}  // namespace qms
