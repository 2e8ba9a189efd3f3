#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvebound/rg_flow.hpp"

using namespace curvebound;

namespace {
Curve unit_circle(int nodes = 192) {
  Circle3Spec spec;
  return build_curve(spec, Manifold::euclidean3(), nodes);
}
}  // namespace

TEST_CASE("flow constant equals the curve length") {
  for (double R : {1.0, 0.5, 3.0}) {
    Circle3Spec spec;
    spec.radius = R;
    Curve c = build_curve(spec, Manifold::euclidean3(), 96);
    FlowConstant fc = flow_constant(c);
    CHECK(fc.value == doctest::Approx(c.length()).epsilon(1e-10));
    CHECK(fc.quad_error < 1e-10 * c.length());
  }
}

TEST_CASE("beta function") {
  Curve c = unit_circle();
  CHECK(beta_function(c, 0.0) == 0.0);
  double b1 = beta_function(c, 1.0);
  double b2 = beta_function(c, 2.0);
  CHECK(b1 < 0.0);
  CHECK(b2 / b1 == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("coupling flow") {
  Curve c = unit_circle();
  FlowConstant fc = flow_constant(c);
  RGState st{1.5, 1.0, c.length(), fc.value};

  SUBCASE("identity at tau = 1") {
    CHECK(flow_coupling(st, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  }
  SUBCASE("asymptotic freedom") {
    double far = flow_coupling(st, 1e8);
    CHECK(far > 0.0);
    CHECK(far < 0.3);
    CHECK(flow_coupling(st, 1e4) > far);
  }
  SUBCASE("closed form matches the integrated flow") {
    for (double tau : {0.5, 2.0, 10.0}) {
      double closed = flow_coupling(st, tau);
      double ode = flow_coupling_ode(st, tau, 1e-13);
      CHECK(std::abs(closed - ode) < 1e-8);
    }
  }
  SUBCASE("semigroup composition") {
    double two = flow_coupling(st, 2.0);
    RGState mid{two, 2.0, c.length(), fc.value};
    CHECK(std::abs(flow_coupling(mid, 3.0) - flow_coupling(st, 6.0)) < 1e-10);
  }
  SUBCASE("the closed form satisfies the flow equation pointwise") {
    for (double tau : {0.7, 1.0, 1.5, 3.0, 8.0}) {
      double h = 1e-6;
      double lam = flow_coupling(st, tau);
      double dldx = (flow_coupling(st, tau * std::exp(h)) -
                     flow_coupling(st, tau * std::exp(-h))) /
                    (2.0 * h);
      double beta = -lam * lam * fc.value / (2.0 * M_PI * c.length());
      CHECK(std::abs(dldx - beta) < 1e-8);
    }
  }
  SUBCASE("pole crossing is reported") {
    double tau_pole = flow_pole(st);
    CHECK(tau_pole < 1.0);
    CHECK_THROWS_AS(flow_coupling(st, tau_pole * 0.5), FlowSingularityError);
  }
}

TEST_CASE("scaling law") {
  Manifold m = Manifold::euclidean3();
  Circle3Spec spec;
  QuadratureConfig cfg;

  SUBCASE("identity scale") {
    ScalingLawReport rep = scaling_law_check(spec, m, 192, 0.5, 1.0, -1.0, 1.0, cfg);
    CHECK(rep.discrepancy == 0.0);
  }
  SUBCASE("on-shell subtraction and finite coupling") {
    for (double inv_lambda : {0.0, 0.5}) {
      for (double tau : {0.5, 2.0, 4.0}) {
        for (double E : {-0.5, -1.0, -2.0}) {
          ScalingLawReport rep =
              scaling_law_check(spec, m, 192, inv_lambda, 1.0, E, tau, cfg);
          CAPTURE(inv_lambda);
          CAPTURE(tau);
          CAPTURE(E);
          CHECK(rep.discrepancy < 1e-6);
        }
      }
    }
  }
  SUBCASE("scale independence of the subtracted operator") {
    Curve c = build_curve(spec, m, 192);
    FlowConstant fc = flow_constant(c);
    double col = fc.value / c.length();
    double phi1 = phi_rg_subtracted(c, 0.5, 1.0, -1.0, cfg);
    double inv_flowed = flow_inv_coupling(0.5, col, 1.01);
    double phi2 = phi_rg_subtracted(c, inv_flowed, 1.01, -1.0, cfg);
    CHECK(std::abs(phi1 - phi2) < 1e-6);
  }
}
