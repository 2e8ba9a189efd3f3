#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace curvebound {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// Gauss-Legendre rule of given order, cached.
const GaussRule& gauss_legendre(int n);

// Composite Gauss on [0, b] with panels shrinking geometrically toward 0
// until panel size <= min_scale.  Handles endpoint boundary layers and
// integrable (e.g. logarithmic) endpoint singularities at 0; nodes never
// touch the endpoint itself.
double integrate_graded(double b, double min_scale, int order,
                        const std::function<double(double)>& f);

// \int_0^inf f(t) dt for integrands that decay to zero at both ends of the
// log-t axis.  Trapezoid in u = log t on an automatically located window,
// with step halving until the result changes by less than rel_tol.
double integrate_log_axis(const std::function<double(double)>& f,
                          double t_ref, double rel_tol);

// \int_{t_lo}^inf f(t) dt for integrands decaying at large t; composite
// Gauss panels on the log axis starting at the hard lower cutoff.
double integrate_log_axis_from(const std::function<double(double)>& f,
                               double t_lo, double rel_tol);

// Scaled complementary error function exp(x^2) erfc(x), stable for large x.
double erfcx(double x);

// Adaptive Simpson on [a, b]; used by oracles and cross-checks.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

}  // namespace curvebound
