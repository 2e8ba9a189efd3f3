#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "curvebound/curve_system.hpp"
#include "curvebound/principal_operator.hpp"

namespace curvebound {

struct GridSpec {
  double from = -8.0;  // physical energies
  double to = -1.05;
  int count = 50;
};

struct WavefunctionGrid {
  bool automatic = true;   // bounding box of the system plus margin
  double margin = 0.1;     // per-axis fraction of the span
  Point lo{0, 0, 0}, hi{1, 1, 1};
  int n[3] = {17, 17, 17};
};

struct SolverConfig {
  int nodes = 256;
  double e_min = -1e12;  // physical
  double tol = 1e-10;
  int threads = 0;  // 0: CURVEBOUND_THREADS or hardware
  GridSpec grid;
  WavefunctionGrid wgrid;
  std::vector<double> taus{1.0, 2.0, 4.0};
  double rg_energy = -1.0;  // physical reference energy for the scaling report
};

struct Scenario {
  UnitsConfig units;
  Manifold manifold;
  std::vector<CurveSpec> specs;
  Scheme scheme;
  SolverConfig solver;
  std::string out_dir = "out";
  nlohmann::json raw;
  std::string hash;

  QuadratureConfig quadrature() const;
};

Scenario parse_scenario_json(const nlohmann::json& j);
Scenario parse_scenario_file(const std::string& path);

// Build curves, distances, and the validated system.
CurveSystem realize(const Scenario& sc);

std::string fnv1a_hex(const std::string& bytes);

// Full round-trip precision, '.' decimal point.
std::string format_double(double v);

void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace curvebound
