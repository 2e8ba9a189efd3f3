#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "curvebound/scenario.hpp"

namespace curvebound {

// Builds the system, solves the ground state, runs the positivity and disk
// certificates, and returns the run record.
nlohmann::json run_solve(const Scenario& sc);

// Eigenvalue flow over the configured grid; CSV columns E, omega_k, slope_k.
nlohmann::json run_scan(const Scenario& sc, std::string* csv);

// Ground-state wavefunction on a rectilinear grid; CSV columns x,y,z,psi,flag.
nlohmann::json run_wavefunction(const Scenario& sc, std::string* csv);

// Coupling-flow table and the scaling-law residual report.
nlohmann::json run_rgflow(const Scenario& sc, std::string* csv);

// Invariant suite over every module the scenario touches.  Prints one line
// per check; returns the number of failures.
int run_check(const Scenario& sc, std::uint64_t seed, std::ostream& log);

// Per-entry quadrature diagnostics at a probe energy (debug dump).
nlohmann::json quadrature_debug(const Scenario& sc, double energy_physical);

}  // namespace curvebound
