#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "curvebound/principal_operator.hpp"

namespace curvebound {

// Eigenvalue curves omega^(k)(E) on an energy grid, matched across grid
// points by eigenvector overlap, with analytic slopes A . dPhi/dE . A.
struct EigenFlow {
  std::vector<double> energies;
  Eigen::MatrixXd eigenvalues;              // grid x N, ascending per row
  Eigen::MatrixXd slopes;                   // grid x N
  std::vector<Eigen::MatrixXd> eigenvectors;  // one N x N block per grid point
  std::vector<int> flagged_crossings;       // grid indices with ambiguous tracking
};

EigenFlow eigen_flow(const PrincipalMatrix& phi, const std::vector<double>& grid);

struct SpectralSolution {
  double e_ground = 0.0;
  Eigen::VectorXd ground_vector;  // unit, componentwise positive
  double omega_slope = 0.0;       // A . dPhi/dE . A at e_ground, negative
  double normalization = 0.0;     // |omega_slope|^{-1/2}
  std::pair<double, double> bracket{0.0, 0.0};
  double residual = 0.0;          // |omega_0(e_ground)|
};

// Root of the lowest eigenvalue curve.  Bracket found by doubling away
// from the scheme ceiling; root by bisection-safeguarded secant.
SpectralSolution solve_ground_state(const PrincipalMatrix& phi,
                                    double e_min = -1e12);

struct GershgorinBound {
  double e_star = 0.0;
  struct Row {
    double energy = 0.0;
    double margin = 0.0;  // min_i (Phi_ii - sum_{j != i} |Phi_ij|)
  };
  std::vector<Row> certificate;
};

// Largest energy at which every disk of the assembled matrix excludes
// zero; certifies e_ground >= e_star.
GershgorinBound gershgorin_lower_bound(const PrincipalMatrix& phi,
                                       double e_min = -1e12);

// psi(x) = |domega/dE|^{-1/2} sum_i L_i^{-1/2} A_i \int G_{E}(x, gamma_i(s)) ds.
// Optionally flags points within 1e-6 L of a curve.
std::vector<double> ground_state_wavefunction(
    const SpectralSolution& sol, const CurveSystem& sys,
    const std::vector<Point>& points, const QuadratureConfig& cfg = {},
    std::vector<std::uint8_t>* near_support = nullptr);

struct PositivityReport {
  bool offdiag_negative = false;
  bool components_positive = false;
  double min_component = 0.0;
  double spectral_gap = 0.0;  // omega_1 - omega_0 at e_ground
  bool ground_simple = false;
  bool passed = false;
};

PositivityReport positivity_check(const SpectralSolution& sol,
                                  const PrincipalMatrix& phi);

// Optional L2 normalization over a rectilinear box (trapezoid grid);
// distinct from the resolvent-residue normalization used by default.
double l2_norm_over_box(const SpectralSolution& sol, const CurveSystem& sys,
                        const Point& lo, const Point& hi, int n_per_axis,
                        const QuadratureConfig& cfg = {});

}  // namespace curvebound
