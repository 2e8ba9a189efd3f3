#pragma once

#include "curvebound/curves.hpp"
#include "curvebound/principal_operator.hpp"

namespace curvebound {

struct FlowConstant {
  double value = 0.0;       // the circle-kernel double integral; ~ L
  double quad_error = 0.0;  // quadrature refinement estimate
};

// The constant entering the coupling flow, computed by quadrature of the
// image-sum circle kernel with the exponential weight.
FlowConstant flow_constant(const Curve& c);

// beta(lambda) = -lambda^2 C / (2 pi L); strictly negative for lambda != 0.
double beta_function(const Curve& c, double lambda_R);

struct RGState {
  double lambda_R = 1.0;
  double mu = 1.0;
  double length = 2.0 * 3.14159265358979323846;
  double C = 0.0;  // flow constant; if 0, computed from length on use
};

// Closed-form flow lambda(tau mu) = lambda / (1 + lambda C/(2 pi L) log tau).
// Throws FlowSingularityError when the flow crosses its pole.
double flow_coupling(const RGState& state, double tau);

// Pole location of the closed-form flow (tau at which the denominator
// vanishes), for diagnostics.
double flow_pole(const RGState& state);

// Cross-check: integrate mu dlambda/dmu = beta(lambda) with an adaptive
// embedded Runge-Kutta pair from mu to tau*mu.
double flow_coupling_ode(const RGState& state, double tau, double rel_tol = 1e-12);

// Inverse-coupling form of the flow (exact through lambda -> inf).
inline double flow_inv_coupling(double inv_lambda, double c_over_l, double tau) {
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  return inv_lambda + c_over_l / two_pi * std::log(tau);
}

struct ScalingLawReport {
  double tau = 1.0;
  double energy = -1.0;
  double lhs = 0.0;  // rescaled curve, energy tau^2 E, coupling at mu
  double rhs = 0.0;  // original curve, energy E, coupling flowed to mu tau
  double discrepancy = 0.0;
};

// Verifies that rescaling curve coordinates by 1/tau and the energy by
// tau^2 equals flowing the coupling to scale mu tau.
ScalingLawReport scaling_law_check(const CurveSpec& spec, const Manifold& m,
                                   int nodes, double inv_lambda_R, double mu,
                                   double energy, double tau,
                                   const QuadratureConfig& cfg = {});

}  // namespace curvebound
