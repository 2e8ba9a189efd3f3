#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string bin_path() {
  const char* p = std::getenv("CURVEBOUND_BIN");
  REQUIRE_MESSAGE(p != nullptr, "CURVEBOUND_BIN must point at the CLI binary");
  return p;
}

std::string scenario_dir() {
  const char* p = std::getenv("CURVEBOUND_SCENARIOS");
  REQUIRE_MESSAGE(p != nullptr, "CURVEBOUND_SCENARIOS must point at the scenario dir");
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = bin_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  while (fgets(buf, sizeof(buf), pipe)) res.output += buf;
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("curvebound_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("solve writes a record with the on-shell energy") {
  fs::path out = fresh_dir("solve");
  RunResult r = run_cli("solve --scenario " + scenario_dir() +
                        "/single_circle.json --out " + out.string());
  CHECK(r.exit_code == 0);
  json rec = load_json(out / "solve_record.json");
  CHECK(std::abs(rec["solution"]["e_ground"].get<double>() + 1.0) <= 1e-10);
  CHECK(rec["artifact"]["name"] == "curvebound");
  CHECK(rec["positivity"]["passed"].get<bool>());
}

TEST_CASE("determinism: identical scenario reproduces identical numbers") {
  fs::path out1 = fresh_dir("det1"), out2 = fresh_dir("det2");
  REQUIRE(run_cli("solve --scenario " + scenario_dir() + "/two_circles.json --out " +
                  out1.string())
              .exit_code == 0);
  REQUIRE(run_cli("solve --scenario " + scenario_dir() + "/two_circles.json --out " +
                  out2.string())
              .exit_code == 0);
  json a = load_json(out1 / "solve_record.json");
  json b = load_json(out2 / "solve_record.json");
  CHECK(a["solution"].dump() == b["solution"].dump());
  CHECK(a["gershgorin"].dump() == b["gershgorin"].dump());
  CHECK(a["scenario_hash"] == b["scenario_hash"]);
}

TEST_CASE("thread count does not change the numbers") {
  fs::path out1 = fresh_dir("thr1"), out2 = fresh_dir("thr2");
  REQUIRE(run_cli("solve --scenario " + scenario_dir() + "/two_circles.json --threads 1 --out " +
                  out1.string())
              .exit_code == 0);
  REQUIRE(run_cli("solve --scenario " + scenario_dir() + "/two_circles.json --threads 4 --out " +
                  out2.string())
              .exit_code == 0);
  json a = load_json(out1 / "solve_record.json");
  json b = load_json(out2 / "solve_record.json");
  CHECK(a["solution"].dump() == b["solution"].dump());
}

TEST_CASE("schema violations exit with the schema code") {
  fs::path dir = fresh_dir("schema");
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({
      "manifold": {"kind": "euclidean3"},
      "curves": [{"type": "circle2", "radius": 1.0, "lambda": 1.0}],
      "scheme": {"type": "finite2d"}
    })";
  }
  RunResult r = run_cli("solve --scenario " + (dir / "bad.json").string());
  CHECK(r.exit_code == 2);

  {
    std::ofstream bad(dir / "bad2.json");
    bad << R"({"manifold": {"kind": "euclidean3"}, "curves": [], "scheme": {"type": "bound_state"}})";
  }
  CHECK(run_cli("solve --scenario " + (dir / "bad2.json").string()).exit_code == 2);

  CHECK(run_cli("solve --scenario " + (dir / "missing.json").string()).exit_code == 2);
}

TEST_CASE("intersecting curves exit with the geometry code") {
  fs::path dir = fresh_dir("intersect");
  {
    std::ofstream bad(dir / "crossing.json");
    bad << R"({
      "manifold": {"kind": "euclidean3"},
      "curves": [
        {"type": "circle3", "radius": 1.0, "center": [0,0,0], "normal": [0,0,1], "nu": 1.0},
        {"type": "circle3", "radius": 1.0, "center": [1,0,0], "normal": [0,0,1], "nu": 1.0}
      ],
      "scheme": {"type": "bound_state"},
      "solver": {"nodes": 64}
    })";
  }
  RunResult r = run_cli("solve --scenario " + (dir / "crossing.json").string());
  CHECK(r.exit_code == 3);
  CHECK(run_cli("check --scenario " + (dir / "crossing.json").string()).exit_code == 3);
}

TEST_CASE("scan emits a plot-ready table that round-trips") {
  fs::path out = fresh_dir("scan");
  RunResult r = run_cli("scan --scenario " + scenario_dir() +
                        "/single_circle.json --out " + out.string());
  CHECK(r.exit_code == 0);
  std::ifstream csv(out / "scan.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "E,omega_0,slope_0");
  std::string line;
  int rows = 0;
  bool slopes_negative = true;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream ls(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ls, field, ',')) {
      double v = std::strtod(field.c_str(), nullptr);
      // full round-trip precision
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      CHECK(field == buf);
      vals.push_back(v);
    }
    REQUIRE(vals.size() == 3);
    if (!(vals[2] < 0.0)) slopes_negative = false;
  }
  CHECK(rows == 40);
  CHECK(slopes_negative);

  json rec = load_json(out / "scan_record.json");
  REQUIRE(rec["zero_crossings"].size() == 1);
  double lo = rec["zero_crossings"][0]["e_lo"].get<double>();
  double hi = rec["zero_crossings"][0]["e_hi"].get<double>();
  CHECK(lo <= -1.0);
  CHECK(hi >= -1.0);
}

TEST_CASE("wavefunction grid is positive") {
  fs::path out = fresh_dir("wf");
  RunResult r = run_cli("wavefunction --scenario " + scenario_dir() +
                        "/two_circles.json --out " + out.string());
  CHECK(r.exit_code == 0);
  json rec = load_json(out / "wavefunction_record.json");
  CHECK(rec["all_positive"].get<bool>());
  std::ifstream csv(out / "wavefunction.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x,y,z,psi,near_support");
}

TEST_CASE("rgflow table keeps the coupling fixed at tau = 1") {
  fs::path out = fresh_dir("rg");
  RunResult r = run_cli("rgflow --scenario " + scenario_dir() +
                        "/rg_circle.json --out " + out.string() + " --tau 1.0 --tau 2.0");
  CHECK(r.exit_code == 0);
  std::ifstream csv(out / "rgflow.csv");
  std::string header, row1;
  std::getline(csv, header);
  std::getline(csv, row1);
  CHECK(header == "tau,inv_lambda,lambda");
  std::istringstream ls(row1);
  std::string tau_s, inv_s, lam_s;
  std::getline(ls, tau_s, ',');
  std::getline(ls, inv_s, ',');
  std::getline(ls, lam_s, ',');
  CHECK(std::strtod(tau_s.c_str(), nullptr) == 1.0);
  CHECK(std::strtod(lam_s.c_str(), nullptr) == doctest::Approx(2.0).epsilon(1e-14));
  json rec = load_json(out / "rgflow_record.json");
  CHECK(rec["flow_constant"]["per_length"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& row : rec["scaling_law"])
    CHECK(row["discrepancy"].get<double>() < 1e-6);
}

TEST_CASE("unit systems are mapped at the boundary") {
  fs::path dir = fresh_dir("units");
  {
    std::ofstream sc(dir / "units.json");
    sc << R"({
      "units": {"hbar": 2.0, "mass": 1.0},
      "manifold": {"kind": "euclidean3"},
      "curves": [{"type": "circle3", "radius": 1.0, "nu": 1.0}],
      "scheme": {"type": "bound_state"},
      "solver": {"nodes": 64}
    })";
  }
  fs::path out = fresh_dir("units_out");
  RunResult r = run_cli("solve --scenario " + (dir / "units.json").string() +
                        " --out " + out.string());
  CHECK(r.exit_code == 0);
  json rec = load_json(out / "solve_record.json");
  // hbar^2/(2m) = 2: the canonical energy -1 maps to -2 in these units
  CHECK(rec["solution"]["e_ground"].get<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rec["solution"]["e_ground_physical"].get<double>() ==
        doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("ordering flag is recorded for multi-curve systems") {
  fs::path out = fresh_dir("ordering");
  REQUIRE(run_cli("solve --scenario " + scenario_dir() + "/two_circles.json --out " +
                  out.string())
              .exit_code == 0);
  json rec = load_json(out / "solve_record.json");
  CHECK(rec["gershgorin"]["ordering_ok"].get<bool>());
  CHECK(rec["gershgorin"]["e_star"].get<double>() <=
        rec["solution"]["e_ground"].get<double>() + 1e-9);
}

TEST_CASE("no bound state in range exits with the no-root code") {
  fs::path dir = fresh_dir("noroot");
  {
    std::ofstream sc(dir / "weak.json");
    sc << R"({
      "manifold": {"kind": "plane"},
      "curves": [{"type": "circle2", "radius": 1.0, "lambda": 1e-6}],
      "scheme": {"type": "finite2d"},
      "solver": {"nodes": 64}
    })";
  }
  RunResult r = run_cli("solve --scenario " + (dir / "weak.json").string());
  CHECK(r.exit_code == 4);
}

TEST_CASE("plot helper emits a gnuplot script") {
  fs::path out = fresh_dir("plot");
  RunResult r = run_cli("plot --scenario " + scenario_dir() +
                        "/two_circles.json --out " + out.string());
  CHECK(r.exit_code == 0);
  std::ifstream gp(out / "plot_scan.gp");
  REQUIRE(gp.good());
  std::string text((std::istreambuf_iterator<char>(gp)), std::istreambuf_iterator<char>());
  CHECK(text.find("set datafile separator") != std::string::npos);
  CHECK(text.find("scan.csv") != std::string::npos);
}

TEST_CASE("check passes on the bundled scenarios") {
  for (const char* name :
       {"single_circle", "two_circles", "three_circles", "planar_circle",
        "rg_circle", "torus_pair", "h3_circle", "regularized_circle"}) {
    fs::path out = fresh_dir(std::string("check_") + name);
    RunResult r = run_cli("check --scenario " + scenario_dir() + "/" + name +
                          ".json --out " + out.string());
    CAPTURE(name);
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
  }
}
