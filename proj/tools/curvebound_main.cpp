#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "curvebound/runner.hpp"

namespace {

namespace fs = std::filesystem;
using curvebound::Scenario;
using nlohmann::json;

struct Options {
  std::string scenario_path;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 20250809;
  bool verbose = false;
  std::vector<double> taus;
};

void add_common(CLI::App* cmd, Options* opt) {
  cmd->add_option("--scenario", opt->scenario_path, "scenario JSON file")
      ->required();
  cmd->add_option("--out", opt->out_dir, "output directory (default from scenario)");
  cmd->add_option("--threads", opt->threads, "worker threads (0: auto)");
  cmd->add_option("--seed", opt->seed, "seed for sampled checks");
  cmd->add_flag("--verbose", opt->verbose, "extra diagnostics");
}

Scenario load(const Options& opt) {
  Scenario sc = curvebound::parse_scenario_file(opt.scenario_path);
  if (!opt.out_dir.empty()) sc.out_dir = opt.out_dir;
  if (opt.threads > 0) sc.solver.threads = opt.threads;
  if (!opt.taus.empty()) sc.solver.taus = opt.taus;
  return sc;
}

void emit(const Scenario& sc, const std::string& name, const json& record) {
  fs::path p = fs::path(sc.out_dir) / name;
  curvebound::write_file_atomic(p.string(), record.dump(2) + "\n");
  std::cout << "wrote " << p.string() << "\n";
}

void emit_text(const Scenario& sc, const std::string& name, const std::string& text) {
  fs::path p = fs::path(sc.out_dir) / name;
  curvebound::write_file_atomic(p.string(), text);
  std::cout << "wrote " << p.string() << "\n";
}

int dispatch(const std::string& cmd, const Options& opt) {
  Scenario sc = load(opt);
  if (cmd == "solve") {
    json rec = curvebound::run_solve(sc);
    emit(sc, "solve_record.json", rec);
    if (opt.verbose)
      emit(sc, "quadrature_debug.json",
           curvebound::quadrature_debug(
               sc, sc.units.from_canonical_energy(
                       rec["solution"]["e_ground"].get<double>() * 2.0)));
    std::cout << "E_ground = "
              << curvebound::format_double(rec["solution"]["e_ground"].get<double>())
              << " (canonical), "
              << curvebound::format_double(
                     rec["solution"]["e_ground_physical"].get<double>())
              << " (physical)\n";
    return 0;
  }
  if (cmd == "scan") {
    std::string csv;
    json rec = curvebound::run_scan(sc, &csv);
    emit_text(sc, "scan.csv", csv);
    emit(sc, "scan_record.json", rec);
    return 0;
  }
  if (cmd == "wavefunction") {
    std::string csv;
    json rec = curvebound::run_wavefunction(sc, &csv);
    emit_text(sc, "wavefunction.csv", csv);
    emit(sc, "wavefunction_record.json", rec);
    return 0;
  }
  if (cmd == "rgflow") {
    std::string csv;
    json rec = curvebound::run_rgflow(sc, &csv);
    emit_text(sc, "rgflow.csv", csv);
    emit(sc, "rgflow_record.json", rec);
    return 0;
  }
  if (cmd == "check") {
    int failures = curvebound::run_check(sc, opt.seed, std::cout);
    if (failures > 0) {
      std::cout << failures << " check(s) failed\n";
      return 5;
    }
    std::cout << "all checks passed\n";
    return 0;
  }
  if (cmd == "plot") {
    // convenience: a gnuplot script header for the scan table
    curvebound::CurveSystem sys = curvebound::realize(sc);
    std::ostringstream gp;
    gp << "# gnuplot script for the eigenvalue-flow table\n"
       << "set datafile separator \",\"\n"
       << "set key autotitle columnhead\n"
       << "set xlabel \"E\"\n"
       << "set ylabel \"omega\"\n"
       << "set grid\n"
       << "plot \\\n";
    for (std::size_t k = 0; k < sys.size(); ++k)
      gp << "  \"scan.csv\" using 1:" << (2 + k) << " with lines"
         << (k + 1 < sys.size() ? ", \\\n" : "\n");
    emit_text(sc, "plot_scan.gp", gp.str());
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvebound: bound states of contact interactions supported on closed curves"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* solve = app.add_subcommand("solve", "ground-state energy and certificates");
  CLI::App* scan = app.add_subcommand("scan", "eigenvalue flow over an energy grid");
  CLI::App* wf = app.add_subcommand("wavefunction", "ground-state wavefunction on a grid");
  CLI::App* rg = app.add_subcommand("rgflow", "coupling flow and scaling-law report");
  CLI::App* chk = app.add_subcommand("check", "run the invariant suite");
  CLI::App* plot = app.add_subcommand("plot", "emit a gnuplot script for the scan table");
  for (CLI::App* c : {solve, scan, wf, rg, chk, plot}) add_common(c, &opt);
  rg->add_option("--tau", opt.taus, "scale ratios for the flow table");

  CLI11_PARSE(app, argc, argv);

  try {
    return dispatch(app.get_subcommands().front()->get_name(), opt);
  } catch (const curvebound::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 2;
  } catch (const curvebound::SchemeError& e) {
    std::cerr << "scheme error: " << e.what() << "\n";
    return 2;
  } catch (const curvebound::GeometryError& e) {
    std::cerr << "geometry violation: " << e.what() << "\n";
    return 3;
  } catch (const curvebound::NoRootError& e) {
    std::cerr << "no root: " << e.what() << "\n";
    return 4;
  } catch (const curvebound::InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return 5;
  } catch (const curvebound::QuadratureError& e) {
    std::cerr << "quadrature failure: " << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
