#pragma once

// Brute-force reference quadratures used by the tests.  These stay
// independent of the production entry assembly: plain trapezoid grids over
// angles for circles, with the coincidence limit inserted at the corner.

#include <cmath>
#include <functional>

namespace oracles {

inline constexpr double kPi = 3.14159265358979323846;

// (1/L) iint [e^{-nu r} - e^{-kappa r}]/(4 pi r) over a unit circle,
// r = 2 sin(|t - t'|/2), full n x n angle grid.
inline double circle_diag_subtracted(double nu, double kappa, int n) {
  double sum = 0.0;
  double h = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double r = 2.0 * std::sin(0.5 * std::abs(i - j) * h);
      double v = r < 1e-14
                     ? (kappa - nu) / (4.0 * kPi)
                     : (std::exp(-nu * r) - std::exp(-kappa * r)) / (4.0 * kPi * r);
      sum += v;
    }
  return sum * h * h / (2.0 * kPi);
}

// -(1/(2 pi)) iint e^{-kappa r}/(4 pi r) between coaxial unit circles at
// plane separation sep.
inline double coaxial_offdiag(double kappa, double sep, int n) {
  double sum = 0.0;
  double h = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double planar2 = 2.0 - 2.0 * std::cos((i - j) * h);
      double r = std::sqrt(sep * sep + planar2);
      sum += std::exp(-kappa * r) / (4.0 * kPi * r);
    }
  return -sum * h * h / (2.0 * kPi);
}

// Adaptive Simpson, local copy so the oracle does not share the library path.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double tol, int depth = 44) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double aa, double bb, double fa, double fm, double fb, double whole,
          int d) -> double {
    double m = 0.5 * (aa + bb);
    double flm = f(0.5 * (aa + m)), frm = f(0.5 * (m + bb));
    double left = (m - aa) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (bb - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (d <= 0 || std::abs(delta) <= 15.0 * tol)
      return left + right + delta / 15.0;
    return rec(aa, m, fa, flm, fm, left, d - 1) +
           rec(m, bb, fm, frm, fb, right, d - 1);
  };
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

// 2D diagonal for the unit planar circle: (1/L) iint (1/2pi) K0(kappa r),
// reduced to the angle difference with a log-graded split near coincidence.
inline double circle2d_diag_integral(double kappa, double cut = 1e-7) {
  auto f = [&](double xi) {
    double r = 2.0 * std::sin(0.5 * xi);
    return std::cyl_bessel_k(0.0, kappa * r) / (2.0 * kPi);
  };
  // analytic sliver: K0(z) ~ -log(z/2) - gamma for z -> 0
  const double euler_gamma = 0.57721566490153286;
  double s0 = cut / (2.0 * kPi) * (1.0 - euler_gamma - std::log(kappa * cut / 2.0));
  double body = 0.0;
  double lo = cut;
  while (lo < kPi) {
    double hi = std::min(lo * 8.0, kPi);
    body += simpson(f, lo, hi, 1e-14);
    lo = hi;
  }
  return 2.0 * (s0 + body);
}

}  // namespace oracles
