#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qms/cli.hpp"
#include "qms/config.hpp"

using namespace qms;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qms_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kKepler = R"({
  "dimension": 3,
  "space": {"id": "euclidean"},
  "potential": {"type": "kc", "alpha": 1.0},
  "initial": {"q": [1.0, 0.0, 0.0], "p": [0.0, 1.0, 0.0]},
  "t_end": 2.0,
  "sample_interval": 0.5
})";

}  // namespace

TEST_CASE("catalog commands") {
  const Run list = cli({"catalog", "list"});
  CHECK(list.code == 0);
  CHECK(list.out.find("taub-nut") != std::string::npos);
  CHECK(list.out.find("multifold-kepler") != std::string::npos);

  const Run show = cli({"catalog", "show", "darboux3b"});
  CHECK(show.code == 0);
  for (const char* key : {"metric:", "green:", "kc:", "oscillator:", "monopole:", "centrifugal:", "domain:"})
    CHECK(show.out.find(key) != std::string::npos);

  CHECK(cli({"catalog", "show", "mic-kepler"}).code == 0);
  CHECK(cli({"catalog", "show", "bogus"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("simulate writes the CSV schema and a summary") {
  const fs::path dir = scratch("ok");
  const Run r = cli({"simulate", "--config", write_config(dir, kKepler).string(), "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  const std::string csv = slurp(dir / "out" / "trajectory.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,q1,q2,q3,p1,p2,p3,H,Cl2,Cl3,Cr2");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 10);
  }
  CHECK(rows == 5);

  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["status"] == "completed");
  CHECK(summary["conservation"]["passed"] == true);
  CHECK(summary["samples"] == 5);
}

TEST_CASE("simulate exit codes") {
  const fs::path dir = scratch("codes");
  auto run = [&](const std::string& text) {
    return cli({"simulate", "--config", write_config(dir, text).string(), "--out", (dir / "out").string()}).code;
  };
  CHECK(cli({"simulate", "--config", (dir / "missing.json").string()}).code == 2);
  CHECK(run("{not json") == 2);
  CHECK(run(R"({"dimension": 3, "space": {"id": "euclidean"}, "potential": {"type": "none"}, "tpyo": 1})") == 2);
  CHECK(run(R"({"dimension": 3, "space": {"id": "nowhere"}, "potential": {"type": "none"},
               "initial": {"q": [1, 1, 1], "p": [0, 0, 0]}, "t_end": 1})") == 2);
  // b_1 != 0 with q_1 = 0
  CHECK(run(R"({"dimension": 3, "space": {"id": "euclidean"}, "potential": {"type": "kc", "alpha": 1},
               "b": [1, 0, 0], "initial": {"q": [0, 1, 0], "p": [0, 0, 1]}, "t_end": 1})") == 2);
  // An attractive centrifugal term drives the orbit into q_1 = 0.
  CHECK(run(R"({"dimension": 3, "space": {"id": "euclidean"}, "potential": {"type": "kc", "alpha": 1},
               "b": [-0.5, 0, 0], "initial": {"q": [0.3, 1, 0], "p": [0, 0, 0.5]}, "t_end": 50})") == 3);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["status"] == "integration_failed");
  CHECK(summary["samples"].get<int>() >= 1);
  CHECK(fs::exists(dir / "out" / "trajectory.csv"));
  // A tolerance below roundoff fails the conservation check.
  CHECK(run(R"({"dimension": 3, "space": {"id": "euclidean"}, "potential": {"type": "kc", "alpha": 1},
               "initial": {"q": [1, 0.2, 0], "p": [0, 1, 0.1]}, "t_end": 5, "tolerance": 1e-300})") == 1);
}

TEST_CASE("verify command") {
  const fs::path dir = scratch("verify");
  const Run r = cli({"verify", "identities", "--seed", "7", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "verify_identities.json"));
  CHECK(report["seed"] == 7);
  CHECK(report["passed"] == true);
  CHECK(cli({"verify", "nonsense"}).code == 2);
  CHECK(cli({"verify", "brackets", "--tol", "-1"}).code == 2);
  CHECK(cli({"verify", "identities", "--tol", "1e-300"}).code == 1);

  const fs::path cfg = write_config(dir, R"({"dimension": 3, "system": {"id": "taub-nut-system",
      "params": {"m": 1, "mu2": 0.5}}, "b": [0.1, 0.2, 0.3]})");
  const Run with_config = cli({"verify", "involution", "--config", cfg.string()});
  CHECK(with_config.code == 0);
  CHECK(with_config.out.find("config") != std::string::npos);
}

TEST_CASE("config parsing") {
  CHECK_THROWS_AS(parse_config(R"({"space": {"id": "euclidean"}, "potential": {"type": "none"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dimension": 1, "space": {"id": "euclidean"}, "potential": {"type": "none"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dimension": 2, "system": {"id": "mic-kepler"}, "space": {"id": "euclidean"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dimension": 2, "space": {"id": "euclidean"}, "potential": {"type": "none"},
                                  "b": [1, 2, 3]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dimension": 2, "space": {"id": "euclidean"},
                                  "potential": {"type": "kc", "beta": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dimension": 2, "space": {"id": "euclidean"}, "potential": {"type": "none"},
                                  "integrator": {"method": "euler"}})"),
                  ConfigError);

  const RunConfig c = parse_config(R"cfg({"dimension": 3, "space": {"f": "sqrt(1+c*r)", "params": {"c": 2},
      "domain": [0, null]}, "potential": {"type": "custom", "U": "-k/r", "params": {"k": 1.5}}, "mu2": 0.25,
      "initial": {"r": 1.0, "theta": [1.0, 0.5], "p_r": 0.1, "p_theta": [0.2, 0.3]},
      "integrator": {"method": "implicit-midpoint", "step": 0.005}, "t_end": 3, "seed": 9})cfg");
  CHECK(c.integrator.method == Method::implicit_midpoint);
  CHECK(c.seed == 9);
  const SystemSpec sys = build_system(c);
  CHECK(sys.metric.conformal_factor(1.5) == doctest::Approx(2.0));
  CHECK(sys.potential.value(3.0) == doctest::Approx(-0.5));
  const PhaseState s = initial_state(c, sys);
  CHECK(s.radius() == doctest::Approx(1.0));
}

TEST_CASE("shipped example configs run") {
  for (const auto& entry : fs::directory_iterator(fs::path(QMS_SOURCE_DIR) / "configs")) {
    const fs::path dir = scratch("example_" + entry.path().stem().string());
    const Run r = cli({"simulate", "--config", entry.path().string(), "--out", dir.string()});
    INFO(entry.path().string(), "\n", r.err);
    CHECK(r.code == 0);
  }
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_number(v)) == v);
}
