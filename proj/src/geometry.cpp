#include "curvebound/geometry.hpp"

#include <cmath>
#include <sstream>

#include "curvebound/quadrature.hpp"

namespace curvebound {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * M_PI);
constexpr double kInv2Pi = 1.0 / (2.0 * M_PI);

double wrap_component(double dx, double l) { return dx - l * std::round(dx / l); }

Eigen::Vector3d wrap_displacement(const Manifold& m, const Point& x, const Point& y) {
  Eigen::Vector3d d = x - y;
  for (int k = 0; k < 3; ++k) d[k] = wrap_component(d[k], m.periods[k]);
  return d;
}

// Gaussian heat kernel factor in d dimensions.
double flat_heat(double t, double r2, int dim) {
  return std::pow(4.0 * M_PI * t, -0.5 * dim) * std::exp(-r2 / (4.0 * t));
}

// ---- flat 3-space closed forms --------------------------------------------

double resolvent_flat3(double kappa, double r) {
  return std::exp(-kappa * r) * kInv4Pi / r;
}

double resolvent_denergy_flat3(double kappa, double r) {
  // d/dE of e^{-kappa r}/(4 pi r) at E = -kappa^2
  return std::exp(-kappa * r) / (8.0 * M_PI * kappa);
}

double resolvent_difference_flat3(double nu, double kappa, double r) {
  if (r < 1e-290) return (kappa - nu) * kInv4Pi;
  // e^{-nu r} - e^{-kappa r}, cancellation-free
  return -std::exp(-nu * r) * std::expm1(-(kappa - nu) * r) * kInv4Pi / r;
}

// \int_eps^inf e^{-q^2 t} (4 pi t)^{-3/2} e^{-r^2/4t} dt
double truncated_resolvent_flat3(double q, double eps, double r) {
  double se = std::sqrt(eps);
  if (r < 1e-290) {
    // 2 (4 pi)^{-3/2} [ e^{-q^2 eps}/sqrt(eps) - q sqrt(pi) erfc(q sqrt(eps)) ]
    return 2.0 * std::pow(4.0 * M_PI, -1.5) *
           (std::exp(-q * q * eps) / se -
            q * std::sqrt(M_PI) * std::erfc(q * se));
  }
  double up = r / (2.0 * se) + q * se;
  double um = r / (2.0 * se) - q * se;
  double gauss = std::exp(-r * r / (4.0 * eps) - q * q * eps);
  double term_p = gauss * erfcx(up);  // e^{qr} erfc(up)
  double term_m = um >= 0.0 ? gauss * erfcx(um)
                            : std::exp(-q * r) * std::erfc(um);
  return (2.0 * std::exp(-q * r) - term_m - term_p) / (8.0 * M_PI * r);
}

// ---- plane (2D) closed forms -----------------------------------------------

double resolvent_plane(double kappa, double r) {
  return kInv2Pi * std::cyl_bessel_k(0.0, kappa * r);
}

double resolvent_denergy_plane(double kappa, double r) {
  if (r < 1e-290) return 1.0 / (4.0 * M_PI * kappa * kappa);
  return r * std::cyl_bessel_k(1.0, kappa * r) / (4.0 * M_PI * kappa);
}

double resolvent_difference_plane(double nu, double kappa, double r) {
  if (r < 1e-290) return kInv2Pi * std::log(kappa / nu);
  return kInv2Pi *
         (std::cyl_bessel_k(0.0, nu * r) - std::cyl_bessel_k(0.0, kappa * r));
}

// ---- hyperbolic 3-space -----------------------------------------------------

double h3_heat(double a, double t, double d) {
  double rt = d / a;
  double ratio = rt < 1e-8 ? 1.0 / (1.0 + rt * rt / 6.0) : rt / std::sinh(rt);
  return std::pow(4.0 * M_PI * t, -1.5) * ratio *
         std::exp(-t / (a * a) - d * d / (4.0 * t));
}

double h3_time_peak(double q2, double d) {
  // maximum of t^{-3/2} e^{-q^2 t - d^2/4t}
  if (d <= 0.0) return 0.25 / q2;
  double disc = std::sqrt(2.25 + q2 * d * d);
  double t = (disc - 1.5) / (2.0 * q2);
  return std::max(t, 0.25 / q2 * 1e-4);
}

// ---- torus image sums -------------------------------------------------------

template <class Term>
double torus_image_sum(const Manifold& m, const Eigen::Vector3d& dr,
                       const Term& term) {
  double total = 0.0;
  double last_shell = 0.0;
  for (int shell = 0; shell <= m.max_shells; ++shell) {
    double s = 0.0;
    for (int n1 = -shell; n1 <= shell; ++n1)
      for (int n2 = -shell; n2 <= shell; ++n2)
        for (int n3 = -shell; n3 <= shell; ++n3) {
          if (std::max({std::abs(n1), std::abs(n2), std::abs(n3)}) != shell)
            continue;
          Eigen::Vector3d v = dr + Eigen::Vector3d(n1 * m.periods[0],
                                                   n2 * m.periods[1],
                                                   n3 * m.periods[2]);
          s += term(v.norm());
        }
    total += s;
    last_shell = std::abs(s);
    if (shell >= 1 && last_shell <= m.image_rel_tol * std::abs(total))
      return total;
  }
  std::ostringstream os;
  os << "torus image sum did not converge within " << m.max_shells
     << " shells; tail bounded by the last shell contribution " << last_shell;
  throw QuadratureError(os.str());
}

}  // namespace

Manifold Manifold::plane() {
  Manifold m;
  m.kind = ManifoldKind::EuclideanPlane;
  return m;
}
Manifold Manifold::euclidean3() {
  Manifold m;
  m.kind = ManifoldKind::EuclideanSpace3;
  return m;
}
Manifold Manifold::torus3(double l1, double l2, double l3) {
  if (!(l1 > 0.0 && l2 > 0.0 && l3 > 0.0))
    throw GeometryError("torus periods must be strictly positive");
  Manifold m;
  m.kind = ManifoldKind::FlatTorus3;
  m.periods = Eigen::Vector3d(l1, l2, l3);
  return m;
}
Manifold Manifold::hyperbolic3(double a) {
  if (!(a > 0.0))
    throw GeometryError("hyperbolic curvature scale must be strictly positive");
  Manifold m;
  m.kind = ManifoldKind::HyperbolicSpace3;
  m.curvature_scale = a;
  return m;
}

const char* Manifold::name() const {
  switch (kind) {
    case ManifoldKind::EuclideanPlane: return "plane";
    case ManifoldKind::EuclideanSpace3: return "euclidean3";
    case ManifoldKind::FlatTorus3: return "torus3";
    case ManifoldKind::HyperbolicSpace3: return "hyperbolic3";
  }
  return "?";
}

void validate_point(const Manifold& m, const Point& x) {
  if (!x.allFinite()) throw GeometryError("point has non-finite coordinates");
  if (m.kind == ManifoldKind::HyperbolicSpace3 && !(x[2] > 0.0))
    throw GeometryError("upper half-space chart requires z > 0");
}

Point reduce_to_fundamental_domain(const Manifold& m, const Point& x) {
  if (m.kind != ManifoldKind::FlatTorus3) return x;
  Point r = x;
  for (int k = 0; k < 3; ++k) {
    double l = m.periods[k];
    r[k] = x[k] - l * std::floor(x[k] / l);
  }
  return r;
}

double geodesic_distance(const Manifold& m, const Point& x, const Point& y) {
  validate_point(m, x);
  validate_point(m, y);
  switch (m.kind) {
    case ManifoldKind::EuclideanPlane:
    case ManifoldKind::EuclideanSpace3:
      return (x - y).norm();
    case ManifoldKind::FlatTorus3:
      return wrap_displacement(m, x, y).norm();
    case ManifoldKind::HyperbolicSpace3: {
      double rho2 = (x - y).squaredNorm();
      double u = rho2 / (2.0 * x[2] * y[2]);
      // acosh(1 + u), cancellation-free for small u
      return m.curvature_scale * std::log1p(u + std::sqrt(u * (u + 2.0)));
    }
  }
  return 0.0;
}

double circle_heat_kernel(double l, double t, double dx) {
  dx = wrap_component(dx, l);
  double total = 0.0;
  if (t <= l * l / (4.0 * M_PI)) {
    // Gaussian images
    double norm = std::pow(4.0 * M_PI * t, -0.5);
    total = norm * std::exp(-dx * dx / (4.0 * t));
    for (int n = 1; n < 512; ++n) {
      double a = dx + n * l, b = dx - n * l;
      double term = norm * (std::exp(-a * a / (4.0 * t)) +
                            std::exp(-b * b / (4.0 * t)));
      total += term;
      if (term <= 1e-16 * total) break;
    }
  } else {
    // dual (Fourier) sum
    total = 1.0 / l;
    for (int n = 1; n < 512; ++n) {
      double term = 2.0 / l * std::exp(-4.0 * M_PI * M_PI * n * n * t / (l * l)) *
                    std::cos(2.0 * M_PI * n * dx / l);
      total += term;
      if (std::abs(term) <= 1e-16 * std::abs(total)) break;
    }
  }
  return total;
}

double heat_kernel(const Manifold& m, double t, const Point& x, const Point& y) {
  if (!(t > 0.0)) throw GeometryError("heat kernel requires t > 0");
  validate_point(m, x);
  validate_point(m, y);
  switch (m.kind) {
    case ManifoldKind::EuclideanPlane:
      return flat_heat(t, (x - y).squaredNorm(), 2);
    case ManifoldKind::EuclideanSpace3:
      return flat_heat(t, (x - y).squaredNorm(), 3);
    case ManifoldKind::FlatTorus3: {
      Eigen::Vector3d d = wrap_displacement(m, x, y);
      return circle_heat_kernel(m.periods[0], t, d[0]) *
             circle_heat_kernel(m.periods[1], t, d[1]) *
             circle_heat_kernel(m.periods[2], t, d[2]);
    }
    case ManifoldKind::HyperbolicSpace3:
      return h3_heat(m.curvature_scale, t, geodesic_distance(m, x, y));
  }
  return 0.0;
}

double heat_kernel_diagonal(const Manifold& m, double t, const Point& x) {
  return heat_kernel(m, t, x, x);
}

double resolvent_kernel(const Manifold& m, double kappa, const Point& x,
                        const Point& y) {
  if (!(kappa > 0.0)) throw GeometryError("resolvent requires kappa > 0");
  validate_point(m, x);
  validate_point(m, y);
  double r = geodesic_distance(m, x, y);
  if (m.dimension() == 3 && r < 1e-290)
    throw GeometryError(
        "resolvent kernel at coincident points; use the subtracted diagonal");
  switch (m.kind) {
    case ManifoldKind::EuclideanPlane:
      if (r < 1e-290)
        throw GeometryError(
            "resolvent kernel at coincident points; use the subtracted diagonal");
      return resolvent_plane(kappa, r);
    case ManifoldKind::EuclideanSpace3:
      return resolvent_flat3(kappa, r);
    case ManifoldKind::FlatTorus3: {
      Eigen::Vector3d d = wrap_displacement(m, x, y);
      return torus_image_sum(
          m, d, [&](double rho) { return resolvent_flat3(kappa, rho); });
    }
    case ManifoldKind::HyperbolicSpace3: {
      double a = m.curvature_scale;
      double q2 = kappa * kappa + 1.0 / (a * a);
      return integrate_log_axis(
          [&](double t) {
            return std::exp(-kappa * kappa * t) * h3_heat(a, t, r);
          },
          h3_time_peak(q2, r), m.time_rel_tol);
    }
  }
  return 0.0;
}

double resolvent_denergy(const Manifold& m, double kappa, const Point& x,
                         const Point& y) {
  if (!(kappa > 0.0)) throw GeometryError("resolvent requires kappa > 0");
  double r = geodesic_distance(m, x, y);
  switch (m.kind) {
    case ManifoldKind::EuclideanPlane:
      return resolvent_denergy_plane(kappa, r);
    case ManifoldKind::EuclideanSpace3:
      return resolvent_denergy_flat3(kappa, r);
    case ManifoldKind::FlatTorus3: {
      Eigen::Vector3d d = wrap_displacement(m, x, y);
      return torus_image_sum(m, d, [&](double rho) {
        return resolvent_denergy_flat3(kappa, rho);
      });
    }
    case ManifoldKind::HyperbolicSpace3: {
      double a = m.curvature_scale;
      double q2 = kappa * kappa + 1.0 / (a * a);
      return integrate_log_axis(
          [&](double t) {
            return t * std::exp(-kappa * kappa * t) * h3_heat(a, t, r);
          },
          h3_time_peak(q2, r), m.time_rel_tol);
    }
  }
  return 0.0;
}

double resolvent_difference(const Manifold& m, double nu, double kappa,
                            const Point& x, const Point& y) {
  if (!(nu > 0.0 && kappa > 0.0))
    throw GeometryError("resolvent difference requires positive wavenumbers");
  double r = geodesic_distance(m, x, y);
  switch (m.kind) {
    case ManifoldKind::EuclideanPlane:
      return resolvent_difference_plane(nu, kappa, r);
    case ManifoldKind::EuclideanSpace3:
      return resolvent_difference_flat3(nu, kappa, r);
    case ManifoldKind::FlatTorus3: {
      Eigen::Vector3d d = wrap_displacement(m, x, y);
      return torus_image_sum(m, d, [&](double rho) {
        return resolvent_difference_flat3(nu, kappa, rho);
      });
    }
    case ManifoldKind::HyperbolicSpace3: {
      double a = m.curvature_scale;
      double q2 = nu * nu + 1.0 / (a * a);
      return integrate_log_axis(
          [&](double t) {
            // e^{-nu^2 t} - e^{-kappa^2 t}, cancellation-free
            double diff = -std::exp(-nu * nu * t) *
                          std::expm1((nu * nu - kappa * kappa) * t);
            return diff * h3_heat(a, t, r);
          },
          h3_time_peak(q2, r), m.time_rel_tol);
    }
  }
  return 0.0;
}

double truncated_resolvent(const Manifold& m, double q, double eps,
                           const Point& x, const Point& y) {
  if (!(eps > 0.0)) throw GeometryError("time cutoff must be positive");
  double r = geodesic_distance(m, x, y);
  switch (m.kind) {
    case ManifoldKind::EuclideanSpace3:
      return truncated_resolvent_flat3(q, eps, r);
    case ManifoldKind::FlatTorus3: {
      Eigen::Vector3d d = wrap_displacement(m, x, y);
      return torus_image_sum(m, d, [&](double rho) {
        return truncated_resolvent_flat3(q, eps, rho);
      });
    }
    case ManifoldKind::EuclideanPlane:
      return integrate_log_axis_from(
          [&](double t) {
            return std::exp(-q * q * t) * flat_heat(t, r * r, 2);
          },
          eps, m.time_rel_tol);
    case ManifoldKind::HyperbolicSpace3:
      return integrate_log_axis_from(
          [&](double t) { return std::exp(-q * q * t) * h3_heat(m.curvature_scale, t, r); },
          eps, m.time_rel_tol);
  }
  return 0.0;
}

double truncated_resolvent_tweight(const Manifold& m, double q, double eps,
                                   const Point& x, const Point& y) {
  if (!(eps > 0.0)) throw GeometryError("time cutoff must be positive");
  double r = geodesic_distance(m, x, y);
  auto kernel = [&](double t) {
    switch (m.kind) {
      case ManifoldKind::EuclideanPlane: return flat_heat(t, r * r, 2);
      case ManifoldKind::EuclideanSpace3: return flat_heat(t, r * r, 3);
      case ManifoldKind::FlatTorus3: {
        Eigen::Vector3d d = wrap_displacement(m, x, y);
        return circle_heat_kernel(m.periods[0], t, d[0]) *
               circle_heat_kernel(m.periods[1], t, d[1]) *
               circle_heat_kernel(m.periods[2], t, d[2]);
      }
      case ManifoldKind::HyperbolicSpace3:
        return h3_heat(m.curvature_scale, t, r);
    }
    return 0.0;
  };
  return integrate_log_axis_from(
      [&](double t) { return t * std::exp(-q * q * t) * kernel(t); }, eps,
      m.time_rel_tol);
}

double metric_norm(const Manifold& m, const Point& x, const Eigen::Vector3d& v) {
  if (m.kind == ManifoldKind::HyperbolicSpace3)
    return m.curvature_scale / x[2] * v.norm();
  return v.norm();
}

Eigen::Vector3d covariant_acceleration(const Manifold& m, const Point& x,
                                       const Eigen::Vector3d& v,
                                       const Eigen::Vector3d& dv_ds) {
  if (m.kind != ManifoldKind::HyperbolicSpace3) return dv_ds;
  double z = x[2];
  Eigen::Vector3d acc = dv_ds - 2.0 * v[2] / z * v;
  acc[2] += v.squaredNorm() / z;
  return acc;
}

}  // namespace curvebound
