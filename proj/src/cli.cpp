#include "qms/cli.hpp"

#include <CLI11.hpp>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qms/config.hpp"
#include "qms/verify.hpp"

namespace qms {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string digits17(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string params_text(const std::vector<CatalogParam>& params) {
  if (params.empty()) return "none";
  std::string out;
  for (const auto& p : params) {
    if (!out.empty()) out += "; ";
    out += p.name;
    if (p.default_value) out += " = " + format_number(*p.default_value);
    if (!p.meaning.empty()) out += " (" + p.meaning + ")";
  }
  return out;
}

int catalog_list(std::ostream& out) {
  out << "spaces:\n";
  for (const auto& e : space_catalog()) out << "  " << e.id << "  " << e.description << "\n";
  out << "systems:\n";
  for (const auto& e : named_system_catalog()) out << "  " << e.id << "  " << e.description << "\n";
  return exit_ok;
}

int catalog_show(const std::string& id, std::ostream& out, std::ostream& err) {
  for (const auto& e : space_catalog()) {
    if (e.id != id) continue;
    const auto& row = potential_catalog_entry(id);
    out << "id:           " << e.id << "\n"
        << "description:  " << e.description << "\n"
        << "metric:       ds^2 = " << e.metric_text << " dq^2\n"
        << "domain:       " << e.domain_note << "\n"
        << "parameters:   " << params_text(e.params) << "\n"
        << "green:        " << row.green << "\n"
        << "kc:           " << row.kc << "\n"
        << "oscillator:   " << row.oscillator << "\n"
        << "monopole:     " << row.monopole << "\n"
        << "centrifugal:  " << row.centrifugal << "\n";
    return exit_ok;
  }
  for (const auto& e : named_system_catalog()) {
    if (e.id != id) continue;
    out << "id:           " << e.id << "\n"
        << "description:  " << e.description << "\n"
        << "parameters:   " << params_text(e.params) << "\n";
    return exit_ok;
  }
  err << "error: unknown catalog id '" << id << "' (see 'qms catalog list')\n";
  return exit_config;
}

ojson conservation_json(const ConservationReport& rep) {
  ojson j;
  j["tolerance"] = rep.tolerance;
  j["passed"] = rep.passed;
  j["max_drift"] = rep.max_drift();
  auto& list = j["quantities"] = ojson::array();
  for (const auto& q : rep.quantities)
    list.push_back(ojson{{"name", q.name}, {"initial", q.initial}, {"drift", q.drift}, {"passed", q.passed}});
  return j;
}

void write_outputs(const fs::path& dir, const RunConfig& cfg, const SystemSpec& sys, const TrajectoryRecord& rec,
                   const std::string& status, const std::string& message, std::optional<ConservationReport> rep) {
  fs::create_directories(dir);
  write_file(dir / "trajectory.csv", trajectory_csv(rec));

  ojson j;
  j["status"] = status;
  if (!message.empty()) j["message"] = message;
  j["system"] = sys.name;
  j["metric"] = sys.metric.id();
  j["potential"] = sys.potential.label();
  j["dimension"] = sys.dimension();
  j["mu2"] = sys.mu2;
  j["b"] = sys.b;
  j["method"] = cfg.integrator.method == Method::dop853 ? "dop853" : "implicit-midpoint";
  j["t_end"] = cfg.t_end;
  j["seed"] = cfg.seed;
  j["samples"] = rec.size();
  j["t_final"] = rec.size() ? rec.times.back() : 0.0;
  j["steps"] = rec.stats.steps;
  j["rejected_steps"] = rec.stats.rejected;
  j["evaluations"] = rec.stats.evaluations;
  if (rep) j["conservation"] = conservation_json(*rep);
  write_file(dir / "summary.json", j.dump(2) + "\n");
}

int simulate(const std::string& config_path, const std::string& out_opt, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::optional<SystemSpec> sys;
  PhaseState s0;
  try {
    cfg = load_config(config_path);
    if (!(cfg.t_end > 0.0)) throw ConfigError("'t_end' is required for simulate");
    sys.emplace(build_system(cfg));
    s0 = initial_state(cfg, *sys);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  }
  const fs::path dir = !out_opt.empty() ? fs::path(out_opt) : fs::path(cfg.out_dir.value_or("out"));

  try {
    const TrajectoryRecord rec = integrate(*sys, s0, cfg.t_end, cfg.integrator);
    const ConservationReport rep = conservation_report(rec, cfg.tolerance);
    write_outputs(dir, cfg, *sys, rec, "completed", "", rep);
    out << "samples " << rec.size() << ", steps " << rec.stats.steps << ", max drift " << digits17(rep.max_drift())
        << (rep.passed ? " (pass)" : " (FAIL)") << "\n";
    out << "wrote " << (dir / "trajectory.csv").string() << " and " << (dir / "summary.json").string() << "\n";
    return rep.passed ? exit_ok : exit_verify_failed;
  } catch (const IntegrationError& e) {
    const auto& partial = e.partial();
    std::optional<ConservationReport> rep;
    if (partial.size() > 0) rep = conservation_report(partial, cfg.tolerance);
    try {
      write_outputs(dir, cfg, *sys, partial, "integration_failed", e.what(), rep);
    } catch (const std::exception& w) {
      err << "error: " << w.what() << "\n";
    }
    err << "integration failed: " << e.what() << "\n";
    if (partial.size()) err << "last valid time " << digits17(partial.times.back()) << "\n";
    return exit_runtime;
  }
}

int verify(const std::string& suite, const std::string& config_path, std::optional<std::uint64_t> seed,
           std::optional<double> tol, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  VerifyOptions opt;
  try {
    if (!config_path.empty()) {
      opt.config = load_config(config_path);
      build_system(*opt.config);
      opt.seed = opt.config->seed;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  }
  if (seed) opt.seed = *seed;
  opt.tolerance = tol;

  std::vector<std::string> suites;
  if (suite == "all") {
    suites = verify_suites();
  } else if (std::find(verify_suites().begin(), verify_suites().end(), suite) != verify_suites().end()) {
    suites = {suite};
  } else {
    err << "error: unknown suite '" << suite << "'\n";
    return exit_config;
  }

  bool all_passed = true;
  for (const auto& name : suites) {
    const VerifyReport rep = run_verify(name, opt);
    for (const auto& c : rep.checks)
      out << (c.passed ? "PASS " : "FAIL ") << name << ": " << c.name << "  max " << digits17(c.max_residual)
          << " tol " << digits17(c.tolerance) << "  (" << c.samples << " samples)\n";
    all_passed = all_passed && rep.passed();
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / ("verify_" + name + ".json"), rep.to_json());
    }
  }
  out << (all_passed ? "verify: PASS" : "verify: FAIL") << "\n";
  return all_passed ? exit_ok : exit_verify_failed;
}

}  // namespace

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
  const int n = rec.dimension;
  std::string text = "t";
  for (int i = 1; i <= n; ++i) text += ",q" + std::to_string(i);
  for (int i = 1; i <= n; ++i) text += ",p" + std::to_string(i);
  text += ",H";
  for (int m = 2; m <= n; ++m) text += ",Cl" + std::to_string(m);
  for (int m = 2; m < n; ++m) text += ",Cr" + std::to_string(m);
  text += "\n";
  for (std::size_t k = 0; k < rec.size(); ++k) {
    text += digits17(rec.times[k]);
    for (double v : rec.states[k].q) text += "," + digits17(v);
    for (double v : rec.states[k].p) text += "," + digits17(v);
    text += "," + digits17(rec.energy[k]);
    const auto& in = rec.integrals[k];
    for (double v : in.left) text += "," + digits17(v);
    for (std::size_t m = 0; m + 1 < in.right.size(); ++m) text += "," + digits17(in.right[m]);
    text += "\n";
  }
  return text;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Superintegrable systems on conformally flat spaces", "qms"};
  app.require_subcommand(1);

  auto* catalog = app.add_subcommand("catalog", "List or show catalog spaces and systems");
  catalog->require_subcommand(1);
  catalog->add_subcommand("list", "List catalog ids");
  auto* show = catalog->add_subcommand("show", "Show one catalog entry");
  std::string show_id;
  show->add_option("id", show_id, "Space or system id")->required();

  auto* sim = app.add_subcommand("simulate", "Integrate a configured system");
  std::string sim_config, sim_out;
  sim->add_option("--config", sim_config, "JSON config file")->required();
  sim->add_option("--out", sim_out, "Output directory");

  auto* ver = app.add_subcommand("verify", "Run a verification suite");
  std::string suite, ver_config, ver_out;
  std::uint64_t seed_value = 0;
  double tol_value = 0.0;
  ver->add_option("suite", suite, "brackets | involution | independence | coords | identities | green | all")
      ->required();
  ver->add_option("--config", ver_config, "JSON config adding a system");
  auto* seed_opt = ver->add_option("--seed", seed_value, "Random seed");
  auto* tol_opt = ver->add_option("--tol", tol_value, "Tolerance for every check")->check(CLI::PositiveNumber);
  ver->add_option("--out", ver_out, "Directory for JSON reports");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*catalog) {
      if (*show) return catalog_show(show_id, out, err);
      return catalog_list(out);
    }
    if (*sim) return simulate(sim_config, sim_out, out, err);
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    if (*seed_opt) seed = seed_value;
    if (*tol_opt) tol = tol_value;
    return verify(suite, ver_config, seed, tol, ver_out, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_runtime;
  }
}

}  // namespace qms
