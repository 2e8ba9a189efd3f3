#include "curvebound/rg_flow.hpp"

#include <cmath>

#include "curvebound/quadrature.hpp"

namespace curvebound {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

double c_over_l(const RGState& s) {
  if (s.C > 0.0) return s.C / s.length;
  return 1.0;  // the computed constant equals the length to quadrature accuracy
}
}  // namespace

FlowConstant flow_constant(const Curve& c) {
  double L = c.length();
  // double integral over the circle of the image-sum kernel with unit
  // exponential weight; the time integral of each Gaussian image is the
  // 1D resolvent e^{-|x|}/2.
  int n_images = static_cast<int>(std::ceil(45.0 / L + 1.0));
  auto weight = [&](double xi) {
    double acc = std::exp(-xi) * 0.5;
    for (int n = 1; n <= n_images; ++n)
      acc += 0.5 * (std::exp(-(n * L + xi)) + std::exp(-(n * L - xi)));
    return acc;
  };
  auto sweep = [&](int order) {
    // integrate over xi in [0, L/2] and symmetrize
    const GaussRule& gl = gauss_legendre(order);
    const int panels = 24;
    double total = 0.0;
    double w = 0.5 * L / panels;
    for (int p = 0; p < panels; ++p) {
      double mid = (p + 0.5) * w;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        double xi = mid + 0.5 * w * gl.nodes[k];
        total += gl.weights[k] * (weight(xi) + weight(L - xi));
      }
    }
    return total * 0.5 * w;
  };
  double coarse = sweep(12), fine = sweep(20);
  FlowConstant out;
  out.value = L * fine;
  out.quad_error = L * std::abs(fine - coarse);
  return out;
}

double beta_function(const Curve& c, double lambda_R) {
  FlowConstant fc = flow_constant(c);
  return -lambda_R * lambda_R * fc.value / (kTwoPi * c.length());
}

double flow_pole(const RGState& state) {
  if (state.lambda_R == 0.0) return 0.0;
  return std::exp(-kTwoPi / (state.lambda_R * c_over_l(state)));
}

double flow_coupling(const RGState& state, double tau) {
  if (!(tau > 0.0)) throw FlowSingularityError("scale ratio must be positive");
  double denom = 1.0 + state.lambda_R * c_over_l(state) / kTwoPi * std::log(tau);
  if (!(denom > 0.0))
    throw FlowSingularityError("coupling flow crosses its pole at tau = " +
                               std::to_string(flow_pole(state)));
  return state.lambda_R / denom;
}

double flow_coupling_ode(const RGState& state, double tau, double rel_tol) {
  // integrate d lambda / dx = beta(lambda) in x = log mu with an embedded
  // Cash-Karp pair
  double col = c_over_l(state) / kTwoPi;
  auto rhs = [&](double y) { return -col * y * y; };
  double x = 0.0, x_end = std::log(tau);
  double y = state.lambda_R;
  double h = (x_end >= 0 ? 1.0 : -1.0) * std::max(1e-3, std::abs(x_end) / 64.0);
  if (x_end == 0.0) return y;
  int guard = 0;
  while ((x_end > 0 ? x < x_end : x > x_end)) {
    if (++guard > 100000) throw QuadratureError("flow integration stalled");
    if ((x_end > 0 && x + h > x_end) || (x_end < 0 && x + h < x_end)) h = x_end - x;
    double k1 = rhs(y);
    double k2 = rhs(y + h * 0.2 * k1);
    double k3 = rhs(y + h * (3.0 / 40 * k1 + 9.0 / 40 * k2));
    double k4 = rhs(y + h * (0.3 * k1 - 0.9 * k2 + 1.2 * k3));
    double k5 = rhs(y + h * (-11.0 / 54 * k1 + 2.5 * k2 - 70.0 / 27 * k3 + 35.0 / 27 * k4));
    double k6 = rhs(y + h * (1631.0 / 55296 * k1 + 175.0 / 512 * k2 + 575.0 / 13824 * k3 +
                             44275.0 / 110592 * k4 + 253.0 / 4096 * k5));
    double y5 = y + h * (37.0 / 378 * k1 + 250.0 / 621 * k3 + 125.0 / 594 * k4 +
                         512.0 / 1771 * k6);
    double y4 = y + h * (2825.0 / 27648 * k1 + 18575.0 / 48384 * k3 +
                         13525.0 / 55296 * k4 + 277.0 / 14336 * k5 + 0.25 * k6);
    double err = std::abs(y5 - y4);
    double tol = rel_tol * std::max(std::abs(y), 1e-12);
    if (err <= tol || std::abs(h) < 1e-14) {
      x += h;
      y = y5;
    }
    double shrink = err > 0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
    h *= std::clamp(shrink, 0.2, 2.0);
  }
  return y;
}

ScalingLawReport scaling_law_check(const CurveSpec& spec, const Manifold& m,
                                   int nodes, double inv_lambda_R, double mu,
                                   double energy, double tau,
                                   const QuadratureConfig& cfg) {
  if (m.kind != ManifoldKind::EuclideanSpace3)
    throw SchemeError("scaling check is restricted to flat 3-space");
  if (!(energy < 0.0)) throw SchemeError("scaling check requires E < 0");
  Curve base = build_curve(spec, m, nodes);
  Curve scaled = build_curve(scale_spec(spec, 1.0 / tau), m, nodes);

  FlowConstant fc = flow_constant(base);
  double inv_flowed =
      flow_inv_coupling(inv_lambda_R, fc.value / base.length(), tau);

  ScalingLawReport rep;
  rep.tau = tau;
  rep.energy = energy;
  rep.lhs = phi_rg_subtracted(scaled, inv_lambda_R, mu, tau * tau * energy, cfg);
  rep.rhs = phi_rg_subtracted(base, inv_flowed, mu, energy, cfg);
  rep.discrepancy = std::abs(rep.lhs - rep.rhs);
  return rep;
}

}  // namespace curvebound
