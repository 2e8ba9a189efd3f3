#pragma once

#include <Eigen/Dense>
#include <vector>

#include "curvebound/curve_system.hpp"

namespace curvebound {

struct QuadratureConfig {
  int panel_order = 16;         // Gauss order of the graded coincidence panels
  double panel_min_rel = 1e-9;  // graded-panel floor relative to L/2
  int threads = 1;              // workers for entry/tile evaluation
};

struct EntryReport {
  int i = 0, j = 0;
  long kernel_evals = 0;
  double estimated_error = 0.0;
  bool resolution_warning = false;  // curves closer than the node spacing
};

// Off-diagonal entry: -(L_i L_j)^{-1/2} \iint G_kappa ds ds' at E = -kappa^2.
// Strictly negative.
double phi_offdiag(const CurveSystem& sys, int i, int j, double energy,
                   const QuadratureConfig& cfg = {});

// Diagonal entry in the binding-wavenumber scheme:
// (1/L_i) \iint [G_nu - G_kappa] ds ds'.  Zero at E = -nu_i^2, positive below.
double phi_diag_boundstate(const CurveSystem& sys, int i, double energy,
                           const QuadratureConfig& cfg = {});

// Diagonal entry with the circle x plane counterterm at scale mu
// (single curve, flat 3-space).  Differs from the binding-wavenumber form
// by an energy-independent constant.
double phi_rg_subtracted(const Curve& c, double inv_lambda_R, double mu,
                         double energy, const QuadratureConfig& cfg = {});

// Two-dimensional matrix: diagonal 1/lambda_i - (1/L_i) \iint G_kappa,
// off-diagonals as in 3D with the plane kernel.
Eigen::MatrixXd phi_finite2d(const CurveSystem& sys, double energy,
                             const QuadratureConfig& cfg = {});

// Cutoff matrix: lower time cutoff eps, couplings fixed by the
// subtraction prescription at scale mu.  Converges entrywise to the
// renormalized matrix as eps -> 0+.
Eigen::MatrixXd phi_regularized(const CurveSystem& sys, const Regularized& reg,
                                double energy, const QuadratureConfig& cfg = {});

// Inverse bare coupling of curve i under the prescription:
// 1/lambda_i(eps) = inv_lambda_R + (1/L_i) \iint \int_eps^inf
//                   e^{-(mu^2+eps) t} K_t.
double regularized_inv_coupling(const CurveSystem& sys, int i,
                                const Regularized& reg,
                                const QuadratureConfig& cfg = {});

// Raw cutoff diagonal 1/lambda_eps - (1/L_i) \iint \int_eps^inf
// e^{(E-eps)t} K_t, taking the bare coupling directly.
double phi_regularized_diag_raw(const CurveSystem& sys, int i, double eps,
                                double inv_lambda_eps, double energy,
                                const QuadratureConfig& cfg = {});

// Entrywise dPhi/dE for the active scheme; all entries strictly negative.
Eigen::MatrixXd phi_derivative(const CurveSystem& sys, double energy,
                               const QuadratureConfig& cfg = {});

// Full matrix for the active scheme.
Eigen::MatrixXd assemble_phi(const CurveSystem& sys, double energy,
                             const QuadratureConfig& cfg = {});

// Evaluator bundle used by the spectral layer.
class PrincipalMatrix {
 public:
  PrincipalMatrix(CurveSystem sys, QuadratureConfig cfg = {})
      : sys_(std::move(sys)), cfg_(cfg) {}

  Eigen::MatrixXd matrix(double energy) const;
  Eigen::MatrixXd derivative(double energy) const;
  std::vector<EntryReport> quadrature_report(double energy) const;

  // Largest admissible energy of the validity domain (E < 0 throughout).
  double energy_ceiling() const { return scheme_energy_ceiling(sys_.scheme); }
  const CurveSystem& system() const { return sys_; }
  const QuadratureConfig& config() const { return cfg_; }

 private:
  CurveSystem sys_;
  QuadratureConfig cfg_;
};

}  // namespace curvebound
