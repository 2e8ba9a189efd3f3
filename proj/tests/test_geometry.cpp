#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "curvebound/geometry.hpp"
#include "curvebound/quadrature.hpp"
#include "oracles.hpp"

using namespace curvebound;

TEST_CASE("geodesic distances") {
  Manifold e3 = Manifold::euclidean3();
  CHECK(geodesic_distance(e3, Point(0, 0, 0), Point(3, 4, 0)) == doctest::Approx(5.0).epsilon(1e-14));

  Manifold t3 = Manifold::torus3(1, 1, 1);
  CHECK(geodesic_distance(t3, Point(0, 0, 0), Point(0.9, 0, 0)) ==
        doctest::Approx(0.1).epsilon(1e-12));

  Manifold h3 = Manifold::hyperbolic3(1.0);
  double d = geodesic_distance(h3, Point(0, 0, 1), Point(0, 0, std::exp(1.0)));
  CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
  // oracle: integrate ds = |dz|/z along the vertical segment
  double arc = oracles::simpson([](double z) { return 1.0 / z; }, 1.0, std::exp(1.0), 1e-13);
  CHECK(d == doctest::Approx(arc).epsilon(1e-10));

  CHECK_THROWS_AS(geodesic_distance(h3, Point(0, 0, -1), Point(0, 0, 1)), GeometryError);
}

TEST_CASE("heat kernel closed forms and limits") {
  Manifold e3 = Manifold::euclidean3();
  double k = heat_kernel(e3, 1.0, Point(0, 0, 0), Point(0, 0, 0));
  CHECK(k == doctest::Approx(std::pow(4.0 * M_PI, -1.5)).epsilon(1e-12));

  // long-time torus limit 1/V, cross-checked by an explicit image sum
  Manifold t3 = Manifold::torus3(1, 1, 1);
  double kt = heat_kernel(t3, 10.0, Point(0.2, 0.1, 0.9), Point(0.5, 0.0, 0.3));
  CHECK(kt == doctest::Approx(1.0).epsilon(1e-6));
  auto axis_sum = [](double t, double dx) {
    double s = 0.0;
    for (int n = -45; n <= 45; ++n)
      s += std::pow(4.0 * M_PI * t, -0.5) * std::exp(-(dx + n) * (dx + n) / (4.0 * t));
    return s;
  };
  double images = axis_sum(10.0, 0.3) * axis_sum(10.0, 0.1) * axis_sum(10.0, 0.6);
  CHECK(kt == doctest::Approx(images).epsilon(1e-10));

  // hyperbolic closed form at curvature -1 against the flat kernel
  Manifold h3 = Manifold::hyperbolic3(1.0);
  Point a(0, 0, 1);
  double r = 0.5, t = 0.01;
  Point b(0, 0, std::exp(r));
  double kh = heat_kernel(h3, t, a, b);
  double flat = std::pow(4.0 * M_PI * t, -1.5) * std::exp(-r * r / (4.0 * t));
  double expected = flat * (r / std::sinh(r)) * std::exp(-t);
  CHECK(kh == doctest::Approx(expected).epsilon(1e-10));

  CHECK_THROWS_AS(heat_kernel(e3, -1.0, a, b), GeometryError);
}

TEST_CASE("heat kernel symmetry positivity scaling") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (Manifold m : {Manifold::euclidean3(), Manifold::plane(),
                     Manifold::torus3(2, 3, 4), Manifold::hyperbolic3(2.0)}) {
    for (int k = 0; k < 40; ++k) {
      Point x(u(rng), u(rng), m.kind == ManifoldKind::HyperbolicSpace3 ? 1.5 + u(rng) / 2 : u(rng));
      Point y(u(rng), u(rng), m.kind == ManifoldKind::HyperbolicSpace3 ? 1.5 + u(rng) / 2 : u(rng));
      if (m.dimension() == 2) x[2] = y[2] = 0.0;
      double t = 0.05 + 0.5 * std::abs(u(rng));
      double kxy = heat_kernel(m, t, x, y);
      double kyx = heat_kernel(m, t, y, x);
      CHECK(kxy > 0.0);
      CHECK(kxy == doctest::Approx(kyx).epsilon(1e-12));
    }
  }
  // scaling: K_t(x, y) = tau^d K_{tau^2 t}(tau x, tau y) on flat backends
  for (Manifold m : {Manifold::euclidean3(), Manifold::plane()}) {
    int d = m.dimension();
    Point x(0.4, -0.3, d == 3 ? 0.2 : 0.0), y(-0.1, 0.8, d == 3 ? -0.6 : 0.0);
    for (double tau : {0.5, 2.0, 10.0}) {
      double lhs = heat_kernel(m, 0.37, x, y);
      double rhs = std::pow(tau, d) *
                   heat_kernel(m, tau * tau * 0.37, Point(tau * x), Point(tau * y));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("heat kernel semigroup and normalization") {
  Manifold e3 = Manifold::euclidean3();
  double t = 0.3, s = 0.5;
  Point x(0.2, 0.0, -0.1), y(-0.3, 0.4, 0.2);
  // \int K_t(x,z) K_s(z,y) dz by tensor Gauss over a box containing the mass
  const GaussRule& gl = gauss_legendre(40);
  double lo = -6.0, hi = 6.0, half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  double conv = 0.0;
  for (int a = 0; a < 40; ++a)
    for (int b = 0; b < 40; ++b)
      for (int c = 0; c < 40; ++c) {
        Point z(mid + half * gl.nodes[a], mid + half * gl.nodes[b],
                mid + half * gl.nodes[c]);
        conv += gl.weights[a] * gl.weights[b] * gl.weights[c] *
                heat_kernel(e3, t, x, z) * heat_kernel(e3, s, z, y);
      }
  conv *= half * half * half;
  CHECK(conv == doctest::Approx(heat_kernel(e3, t + s, x, y)).epsilon(1e-6));

  // normalization on the torus: trapezoid over the fundamental domain
  Manifold t3 = Manifold::torus3(1.5, 2.0, 1.0);
  Point x0(0.3, 0.7, 0.1);
  int n = 32;
  double mass = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        Point z(1.5 * a / n, 2.0 * b / n, 1.0 * c / n);
        mass += heat_kernel(t3, 0.2, x0, z);
      }
  mass *= t3.volume() / (n * n * n);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("resolvent kernels") {
  Manifold e3 = Manifold::euclidean3();
  Point o(0, 0, 0), ex(1, 0, 0);
  double g = resolvent_kernel(e3, 1.0, o, ex);
  CHECK(g == doctest::Approx(std::exp(-1.0) / (4.0 * M_PI)).epsilon(1e-13));
  // time-quadrature oracle
  double g_quad = oracles::simpson(
      [&](double u) {
        double t = std::exp(u);
        return t * std::exp(-t) * std::pow(4 * M_PI * t, -1.5) * std::exp(-0.25 / t);
      },
      -30.0, 6.0, 1e-14);
  CHECK(g == doctest::Approx(g_quad).epsilon(1e-8));
  CHECK_THROWS_AS(resolvent_kernel(e3, 1.0, o, o), GeometryError);

  // plane: log divergence with the known additive constant
  Manifold pl = Manifold::plane();
  const double euler_gamma = 0.57721566490153286;
  for (double r : {1e-4, 1e-3}) {
    double v = resolvent_kernel(pl, 1.0, o, Point(r, 0, 0));
    double asym = (std::log(1.0 / r) + std::log(2.0) - euler_gamma) / (2.0 * M_PI);
    CHECK(v == doctest::Approx(asym).epsilon(1e-5));
  }
  double slope = (resolvent_kernel(pl, 1.0, o, Point(1e-4, 0, 0)) -
                  resolvent_kernel(pl, 1.0, o, Point(1e-2, 0, 0))) /
                 (std::log(1e-2) - std::log(1e-4));
  CHECK(slope == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-3));

  // torus image corrections stay below the explicit shell bound
  Manifold t4 = Manifold::torus3(4, 4, 4);
  double gt = resolvent_kernel(t4, 2.0, o, ex);
  double gf = resolvent_kernel(e3, 2.0, o, ex);
  double bound = 0.0;
  for (int n1 = -3; n1 <= 3; ++n1)
    for (int n2 = -3; n2 <= 3; ++n2)
      for (int n3 = -3; n3 <= 3; ++n3) {
        if (n1 == 0 && n2 == 0 && n3 == 0) continue;
        double rho = (Eigen::Vector3d(1, 0, 0) + 4.0 * Eigen::Vector3d(n1, n2, n3)).norm();
        bound += std::exp(-2.0 * rho) / (4.0 * M_PI * rho);
      }
  CHECK(std::abs(gt - gf) <= bound * 1.0001);
  CHECK(std::abs(gt - gf) < 1e-4);

  // hyperbolic resolvent: quadrature against the closed form of the kernel
  Manifold h3 = Manifold::hyperbolic3(1.0);
  Point a(0, 0, 1), b(0.4, 0.2, 1.3);
  double r = geodesic_distance(h3, a, b);
  double kappa = 1.3;
  double gh = resolvent_kernel(h3, kappa, a, b);
  double q = std::sqrt(kappa * kappa + 1.0);
  double closed = (r / std::sinh(r)) * std::exp(-q * r) / (4.0 * M_PI * r);
  CHECK(gh == doctest::Approx(closed).epsilon(1e-9));
}

TEST_CASE("resolvent difference and derivative kernels") {
  Manifold e3 = Manifold::euclidean3();
  Point o(0, 0, 0);
  // coincidence limit (kappa - nu)/4pi and stability at tiny separation
  double lim = resolvent_difference(e3, 1.0, 2.0, o, o);
  CHECK(lim == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-13));
  double near = resolvent_difference(e3, 1.0, 2.0, o, Point(1e-9, 0, 0));
  CHECK(near == doctest::Approx(lim).epsilon(1e-6));

  // dG/dE: finite difference of the closed form
  double h = 1e-6;
  Point ex(0.7, 0, 0);
  double fd = (resolvent_kernel(e3, std::sqrt(1.0 - h), o, ex) -
               resolvent_kernel(e3, std::sqrt(1.0 + h), o, ex)) /
              (2.0 * h);
  CHECK(resolvent_denergy(e3, 1.0, o, ex) == doctest::Approx(fd).epsilon(1e-8));

  Manifold pl = Manifold::plane();
  double fd2 = (resolvent_kernel(pl, std::sqrt(1.0 - h), o, ex) -
                resolvent_kernel(pl, std::sqrt(1.0 + h), o, ex)) /
               (2.0 * h);
  CHECK(resolvent_denergy(pl, 1.0, o, ex) == doctest::Approx(fd2).epsilon(1e-8));
}

TEST_CASE("fundamental domain reduction and image-sum limits") {
  Manifold t3 = Manifold::torus3(2, 3, 4);
  Point p = reduce_to_fundamental_domain(t3, Point(2.5, -0.5, 9.0));
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(2.5));
  CHECK(p[2] == doctest::Approx(1.0));
  CHECK(reduce_to_fundamental_domain(Manifold::euclidean3(), Point(2.5, -0.5, 9.0)) ==
        Point(2.5, -0.5, 9.0));

  // image sum must report non-convergence instead of truncating silently
  Manifold tight = Manifold::torus3(1, 1, 1);
  tight.max_shells = 1;
  CHECK_THROWS_AS(resolvent_kernel(tight, 0.3, Point(0, 0, 0), Point(0.5, 0, 0)),
                  QuadratureError);
}

TEST_CASE("truncated resolvent") {
  Manifold e3 = Manifold::euclidean3();
  Point o(0, 0, 0), ex(0.8, 0, 0);
  double eps = 1e-3, q = 1.4;
  double closed = truncated_resolvent(e3, q, eps, o, ex);
  double quad = oracles::simpson(
      [&](double u) {
        double t = std::exp(u);
        return t * std::exp(-q * q * t) * std::pow(4 * M_PI * t, -1.5) *
               std::exp(-0.64 / (4.0 * t));
      },
      std::log(eps), 8.0, 1e-15);
  CHECK(closed == doctest::Approx(quad).epsilon(1e-10));
  // eps -> 0 recovers the full resolvent
  CHECK(truncated_resolvent(e3, q, 1e-12, o, ex) ==
        doctest::Approx(resolvent_kernel(e3, q, o, ex)).epsilon(1e-9));
  // coincidence value is finite and positive
  CHECK(truncated_resolvent(e3, q, eps, o, o) > 0.0);
}
