#pragma once

#include <Eigen/Dense>
#include <limits>

#include "curvebound/common.hpp"

namespace curvebound {

// Chart coordinates of a manifold point.  Euclidean 3-space and the flat
// torus use Cartesian coordinates; the plane uses (x, y) with z ignored;
// hyperbolic 3-space uses the upper half-space chart (x, y, z), z > 0.
using Point = Eigen::Vector3d;

struct UnitsConfig {
  double hbar = 1.0;
  double mass = 0.5;  // canonical choice: hbar = 1, mass = 1/2, H0 = -laplacian

  // E_physical = energy_scale() * E_canonical, with E_canonical in 1/length^2.
  double energy_scale() const { return hbar * hbar / (2.0 * mass); }
  double to_canonical_energy(double e_phys) const { return e_phys / energy_scale(); }
  double from_canonical_energy(double e_can) const { return e_can * energy_scale(); }
  void validate() const {
    if (!(hbar > 0.0) || !(mass > 0.0))
      throw ScenarioError("units: hbar and mass must be strictly positive");
  }
};

enum class ManifoldKind { EuclideanPlane, EuclideanSpace3, FlatTorus3, HyperbolicSpace3 };

struct Manifold {
  ManifoldKind kind = ManifoldKind::EuclideanSpace3;
  Eigen::Vector3d periods{0.0, 0.0, 0.0};  // FlatTorus3 only
  double curvature_scale = 1.0;            // HyperbolicSpace3: curvature -1/a^2

  // image-sum / time-quadrature controls
  double image_rel_tol = 1e-12;
  int max_shells = 64;
  double time_rel_tol = 1e-11;

  static Manifold plane();
  static Manifold euclidean3();
  static Manifold torus3(double l1, double l2, double l3);
  static Manifold hyperbolic3(double curvature_scale);

  int dimension() const {
    return kind == ManifoldKind::EuclideanPlane ? 2 : 3;
  }
  bool flat() const {
    return kind != ManifoldKind::HyperbolicSpace3;
  }
  double volume() const {
    if (kind == ManifoldKind::FlatTorus3) return periods.prod();
    return std::numeric_limits<double>::infinity();
  }
  const char* name() const;
};

void validate_point(const Manifold& m, const Point& x);
Point reduce_to_fundamental_domain(const Manifold& m, const Point& x);

double geodesic_distance(const Manifold& m, const Point& x, const Point& y);

// Heat kernel K_t(x, y) in canonical units (H0 = -laplacian, so dK/dt = lap K).
double heat_kernel(const Manifold& m, double t, const Point& x, const Point& y);
double heat_kernel_diagonal(const Manifold& m, double t, const Point& x);

// Resolvent kernel G_kappa(x, y) = \int_0^inf e^{-kappa^2 t} K_t(x, y) dt,
// i.e. the kernel of (H0 + kappa^2)^{-1}.  Requires x != y in 3D.
double resolvent_kernel(const Manifold& m, double kappa, const Point& x,
                        const Point& y);

// dG/dE at E = -kappa^2: \int_0^inf t e^{-kappa^2 t} K_t dt.  Finite at
// coincidence; strictly positive.
double resolvent_denergy(const Manifold& m, double kappa, const Point& x,
                         const Point& y);

// \int_0^inf (e^{-nu^2 t} - e^{-kappa^2 t}) K_t(x, y) dt.  Finite at
// coincidence; this is the subtracted kernel of the renormalized diagonal.
double resolvent_difference(const Manifold& m, double nu, double kappa,
                            const Point& x, const Point& y);

// \int_eps^inf e^{-q^2 t} K_t(x, y) dt (lower time cutoff; finite at
// coincidence for eps > 0).
double truncated_resolvent(const Manifold& m, double q, double eps,
                           const Point& x, const Point& y);

// \int_eps^inf t e^{-q^2 t} K_t(x, y) dt.
double truncated_resolvent_tweight(const Manifold& m, double q, double eps,
                                   const Point& x, const Point& y);

// Heat kernel on a circle of circumference l at arc separation dx,
// evaluated through Gaussian image sums or the dual (Fourier) sum,
// whichever converges faster.
double circle_heat_kernel(double l, double t, double dx);

// Conformal-factor norm of a chart vector at a point (identity for flat
// backends, a/z scaling on hyperbolic 3-space).
double metric_norm(const Manifold& m, const Point& x, const Eigen::Vector3d& v);

// Covariant acceleration nabla_v v given chart velocity v and coordinate
// acceleration dv/ds at x (Christoffel action; zero for flat backends).
Eigen::Vector3d covariant_acceleration(const Manifold& m, const Point& x,
                                       const Eigen::Vector3d& v,
                                       const Eigen::Vector3d& dv_ds);

}  // namespace curvebound
