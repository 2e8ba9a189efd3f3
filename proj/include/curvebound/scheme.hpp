#pragma once

#include <variant>
#include <vector>

#include "curvebound/common.hpp"
#include "curvebound/geometry.hpp"

namespace curvebound {

// Renormalization by the binding wavenumber of each isolated curve
// (on-shell: the inverse renormalized coupling is zero and the scale
// equals nu_i, so the diagonal vanishes exactly at E = -nu_i^2).
struct BoundState3D {
  std::vector<double> nu;  // one positive wavenumber per curve
};

// Two-dimensional theory: finite without subtraction; bare couplings.
struct Finite2D {
  std::vector<double> lambda;  // one positive coupling per curve
};

// Subtraction of the factorized circle x plane kernel at scale mu;
// single curve in flat 3-space.
struct RGSubtracted {
  double inv_lambda_R = 0.0;
  double mu = 1.0;
};

// Lower time cutoff eps with couplings fixed by the subtraction
// prescription at scale mu.
struct Regularized {
  double eps = 1e-4;
  double mu = 1.0;
  double inv_lambda_R = 0.0;
};

using Scheme = std::variant<BoundState3D, Finite2D, RGSubtracted, Regularized>;

void validate_scheme(const Manifold& m, std::size_t n_curves, const Scheme& s);

// Top of the root bracket: the matrix has no zero eigenvalue above this.
// BoundState3D: -max_i nu_i^2.  Finite2D: 0 (approached from below).
double scheme_energy_ceiling(const Scheme& s);

const char* scheme_name(const Scheme& s);

}  // namespace curvebound
