#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>

#include "curvebound/curve_system.hpp"
#include "oracles.hpp"

using namespace curvebound;

namespace {

SampledSpec squarish_polygon(int n, double circumradius) {
  // superellipse-like rounded square sampled at n points
  SampledSpec spec;
  for (int k = 0; k < n; ++k) {
    double t = 2.0 * M_PI * k / n;
    double c = std::cos(t), s = std::sin(t);
    double rho = circumradius / std::pow(std::pow(std::abs(c), 8.0) + std::pow(std::abs(s), 8.0), 0.125);
    spec.points.emplace_back(rho * c, rho * s, 0.0);
  }
  return spec;
}

}  // namespace

TEST_CASE("circle build") {
  Manifold m = Manifold::euclidean3();
  Circle3Spec spec;
  spec.radius = 1.0;
  Curve c = build_curve(spec, m, 128);
  CHECK(c.length() == doctest::Approx(2.0 * M_PI).epsilon(1e-13));
  for (double k : c.frenet().curvature)
    CHECK(k == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c.frenet().curvature_max == doctest::Approx(1.0).epsilon(1e-10));
  // torsion of a planar circle vanishes
  for (double t : c.frenet().torsion) CHECK(std::abs(t) < 1e-8);
}

TEST_CASE("ellipse arclength against the elliptic-integral value") {
  Manifold m = Manifold::euclidean3();
  Ellipse3Spec spec;
  spec.a = 2.0;
  spec.b = 1.0;
  Curve c = build_curve(spec, m, 128);
  // independent oracle: adaptive quadrature of the parametric speed
  double oracle = oracles::simpson(
      [](double t) {
        return std::sqrt(4.0 * std::sin(t) * std::sin(t) + std::cos(t) * std::cos(t));
      },
      0.0, 2.0 * M_PI, 1e-12);
  CHECK(c.length() == doctest::Approx(9.6884482205).epsilon(1e-7));
  CHECK(oracle == doctest::Approx(9.6884482205).epsilon(1e-7));
  CHECK(c.length() == doctest::Approx(oracle).epsilon(1e-10));
  // curvature extremes a/b^2 and b/a^2
  CHECK(c.frenet().curvature_max == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("sampled polygon builds a valid closed curve") {
  Manifold m = Manifold::euclidean3();
  Curve c = build_curve(squarish_polygon(64, 1.0), m, 128);
  CHECK(c.frenet().curvature_max > 0.0);
  CHECK(std::isfinite(c.frenet().curvature_max));
  CHECK(c.self_gap().delta > 0.0);
  // periodicity
  CHECK((c.eval(0.25 * c.length() + c.length()) - c.eval(0.25 * c.length())).norm() < 1e-9);
}

TEST_CASE("sampled input validation") {
  Manifold m = Manifold::euclidean3();
  SampledSpec degenerate;
  for (int k = 0; k < 20; ++k) degenerate.points.emplace_back(k * 0.1, 0.0, 0.0);
  degenerate.points.emplace_back(1.0, 0.0, 0.0);  // duplicate of an interior point
  CHECK_THROWS_AS(build_curve(degenerate, m, 64), GeometryError);

  // figure-eight style crossing is rejected
  SampledSpec crossing;
  for (int k = 0; k < 64; ++k) {
    double t = 2.0 * M_PI * k / 64;
    crossing.points.emplace_back(std::sin(2.0 * t), std::sin(t), 0.0);
  }
  CHECK_THROWS_AS(build_curve(crossing, m, 128), GeometryError);

  SampledSpec tiny;
  tiny.points = {Point(0, 0, 0), Point(1, 0, 0), Point(0, 1, 0)};
  CHECK_THROWS_AS(build_curve(tiny, m, 64), GeometryError);
}

TEST_CASE("arclength parametrization properties") {
  Manifold m = Manifold::euclidean3();
  Ellipse3Spec spec;
  spec.a = 2.0;
  spec.b = 1.0;
  Curve c = build_curve(spec, m, 128);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, c.length());
  for (int k = 0; k < 100; ++k) {
    double s = u(rng), h = 1e-4;
    double ratio = (c.eval(s + h) - c.eval(s)).norm() / h;
    CHECK(std::abs(ratio - 1.0) < 1e-3);
  }
  // curvature against a finite-difference second derivative
  for (int k = 0; k < 16; ++k) {
    double s = c.nodes()[k * 8];
    double h = 1e-4;
    Eigen::Vector3d dd = (c.eval(s + h) - 2.0 * c.eval(s) + c.eval(s - h)) / (h * h);
    CHECK(std::abs(dd.norm() - c.frenet().curvature[k * 8]) < 1e-3);
  }
  // frames orthonormal
  for (std::size_t k = 0; k < c.nodes().size(); k += 16) {
    const auto& f = c.frenet().frames[k];
    CHECK(std::abs(f.tangent.norm() - 1.0) < 1e-6);
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-6);
    CHECK(std::abs(f.binormal.norm() - 1.0) < 1e-6);
    CHECK(std::abs(f.tangent.dot(f.normal)) < 1e-6);
  }
}

TEST_CASE("torus knot has nonvanishing torsion") {
  Manifold m = Manifold::euclidean3();
  TorusKnotSpec spec;
  Curve c = build_curve(spec, m, 256);
  double max_tau = 0.0;
  for (double t : c.frenet().torsion) max_tau = std::max(max_tau, std::abs(t));
  CHECK(max_tau > 0.01);
}

TEST_CASE("self gap certificate for the unit circle") {
  Manifold m = Manifold::euclidean3();
  Circle3Spec spec;
  Curve c = build_curve(spec, m, 128);
  const auto& gap = c.self_gap();
  // admissibility cap 0.99/(2 kappa) = 0.495; the chord inequality holds there
  CHECK(gap.delta >= 0.49);
  CHECK(gap.delta == doctest::Approx(0.495).epsilon(1e-6));
  // chord = 2 sin(xi/2) >= sqrt(1 - delta) xi on a fine grid
  for (int k = 1; k <= 200; ++k) {
    double xi = gap.delta * k / 200;
    CHECK(2.0 * std::sin(0.5 * xi) >= gap.shrink * xi * (1.0 - 1e-12));
  }
  CHECK(min_distance_beyond(c, 0.49) ==
        doctest::Approx(2.0 * std::sin(0.245)).epsilon(1e-5));
  CHECK(gap.min_beyond == doctest::Approx(2.0 * std::sin(0.5 * gap.delta)).epsilon(1e-5));
}

TEST_CASE("distance sandwich holds on certified pairs") {
  Manifold m = Manifold::euclidean3();
  Ellipse3Spec spec;
  spec.a = 2.0;
  spec.b = 1.0;
  Curve c = build_curve(spec, m, 128);
  const auto& gap = c.self_gap();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> us(0.0, c.length());
  std::uniform_real_distribution<double> ux(1e-6, gap.delta);
  for (int k = 0; k < 500; ++k) {
    double s = us(rng), xi = ux(rng);
    double d = (c.eval(s) - c.eval(s + xi)).norm();
    CHECK(d <= xi * (1.0 + 1e-9));
    CHECK(d >= gap.shrink * xi * (1.0 - 1e-9));
  }
}

TEST_CASE("hyperbolic circle length and curvature") {
  double a = 2.0;
  Manifold h3 = Manifold::hyperbolic3(a);
  CircleH3Spec spec;
  spec.radius = 0.7;
  spec.center = Point(0, 0, 1);
  Curve c = build_curve(spec, h3, 96);
  CHECK(c.length() == doctest::Approx(2.0 * M_PI * a * std::sinh(0.7 / a)).epsilon(1e-9));
  double expected_kappa = 1.0 / (a * std::tanh(0.7 / a));
  for (std::size_t k = 0; k < c.nodes().size(); k += 8)
    CHECK(c.frenet().curvature[k] == doctest::Approx(expected_kappa).epsilon(1e-5));
  CHECK(c.frenet().accuracy < 1e-5);
}

TEST_CASE("pairwise distances") {
  Manifold m = Manifold::euclidean3();
  Circle3Spec c1, c2;
  c2.center = Point(0, 0, 5);
  std::vector<Curve> coaxial{build_curve(c1, m, 128), build_curve(c2, m, 128)};
  Eigen::MatrixXd d = pairwise_distances(m, coaxial);
  CHECK(d(0, 1) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(d(1, 0) == d(0, 1));
  CHECK(d(0, 0) == 0.0);

  Circle3Spec c3;
  c3.center = Point(4, 0, 0);
  std::vector<Curve> coplanar{build_curve(c1, m, 128), build_curve(c3, m, 128)};
  CHECK(pairwise_distances(m, coplanar)(0, 1) == doctest::Approx(2.0).epsilon(1e-10));

  // wrap through the torus: offset 9 with period 10 acts like offset 1
  Manifold t3 = Manifold::torus3(10, 10, 10);
  Circle3Spec t1, t2;
  t2.center = Point(9, 0, 0.5);
  std::vector<Curve> wrapped{build_curve(t1, t3, 128), build_curve(t2, t3, 128)};
  double dt = pairwise_distances(t3, wrapped)(0, 1);
  Circle3Spec e2;
  e2.center = Point(1, 0, 0.5);
  std::vector<Curve> euclid{build_curve(t1, m, 128), build_curve(e2, m, 128)};
  double de = pairwise_distances(m, euclid)(0, 1);
  CHECK(dt == doctest::Approx(de).epsilon(1e-6));

  // touching circles are rejected
  Circle3Spec touch;
  touch.center = Point(2, 0, 0);
  std::vector<Curve> touching{build_curve(c1, m, 128), build_curve(touch, m, 128)};
  CHECK_THROWS_AS(pairwise_distances(m, touching), GeometryError);
}

TEST_CASE("sampled points from a plain-text table") {
  std::string path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                     "/curvebound_points.txt";
  {
    std::ofstream out(path);
    out << "# a rounded polygon, one point per line\n";
    for (int k = 0; k < 32; ++k) {
      double t = 2.0 * M_PI * k / 32;
      out << 1.5 * std::cos(t) << " " << 1.5 * std::sin(t) << " 0.0";
      if (k % 5 == 0) out << "   # vertex " << k;
      out << "\n";
    }
  }
  SampledSpec spec = read_sampled_points(path);
  CHECK(spec.points.size() == 32);
  Curve c = build_curve(spec, Manifold::euclidean3(), 64);
  CHECK(c.length() == doctest::Approx(2.0 * M_PI * 1.5).epsilon(1e-3));
  CHECK_THROWS_AS(read_sampled_points("/nonexistent/points.txt"), ScenarioError);
}

TEST_CASE("spec scaling") {
  Manifold m = Manifold::euclidean3();
  Ellipse3Spec spec;
  spec.a = 2.0;
  spec.b = 1.0;
  Curve base = build_curve(spec, m, 64);
  Curve half = build_curve(scale_spec(CurveSpec(spec), 0.5), m, 64);
  CHECK(half.length() == doctest::Approx(0.5 * base.length()).epsilon(1e-12));
  CHECK(half.frenet().curvature_max ==
        doctest::Approx(2.0 * base.frenet().curvature_max).epsilon(1e-8));
}
