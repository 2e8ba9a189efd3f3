#include "curvebound/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "curvebound/common.hpp"

namespace curvebound {

namespace {

// Legendre polynomial value and derivative by recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

GaussRule build_gauss(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton refinement.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre(n, x);
    (void)p;
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss(n)).first;
  return it->second;
}

double integrate_graded(double b, double min_scale, int order,
                        const std::function<double(double)>& f) {
  if (!(b > 0.0)) return 0.0;
  min_scale = std::min(std::max(min_scale, b * 1e-15), b);
  const GaussRule& gl = gauss_legendre(order);
  double total = 0.0;
  double hi = b;
  for (;;) {
    double lo = hi > 2.0 * min_scale ? hi * 0.5 : 0.0;
    double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
    double panel = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k)
      panel += gl.weights[k] * f(mid + half * gl.nodes[k]);
    total += panel * half;
    if (lo == 0.0) break;
    hi = lo;
  }
  return total;
}

double integrate_log_axis(const std::function<double(double)>& f,
                          double t_ref, double rel_tol) {
  const double u0 = std::log(std::max(t_ref, 1e-300));
  auto g = [&](double u) { return f(std::exp(u)) * std::exp(u); };

  // Locate a window outside which the integrand is negligible.
  double peak = std::abs(g(u0));
  double ulo = u0, uhi = u0;
  const double step = 1.0;
  for (int k = 0; k < 400; ++k) {
    double v = std::abs(g(uhi + step));
    peak = std::max(peak, v);
    uhi += step;
    if (v <= peak * 1e-18 && k > 2) break;
  }
  for (int k = 0; k < 400; ++k) {
    double v = std::abs(g(ulo - step));
    peak = std::max(peak, v);
    ulo -= step;
    if (v <= peak * 1e-18 && k > 2) break;
  }
  if (peak == 0.0) return 0.0;

  // Trapezoid with step halving; reuse previous sums.
  double h = 0.5;
  long n = std::lround((uhi - ulo) / h);
  h = (uhi - ulo) / n;
  double sum = 0.5 * (g(ulo) + g(uhi));
  for (long k = 1; k < n; ++k) sum += g(ulo + k * h);
  double prev = sum * h;
  for (int level = 0; level < 14; ++level) {
    double mid_sum = 0.0;
    for (long k = 0; k < n; ++k) mid_sum += g(ulo + (k + 0.5) * h);
    double cur = 0.5 * prev + 0.5 * h * mid_sum;
    h *= 0.5;
    n *= 2;
    if (std::abs(cur - prev) <=
        rel_tol * std::max(std::abs(cur), peak * 1e-30)) {
      return cur;
    }
    prev = cur;
  }
  return prev;
}

double integrate_log_axis_from(const std::function<double(double)>& f,
                               double t_lo, double rel_tol) {
  if (!(t_lo > 0.0)) throw QuadratureError("log-axis cutoff must be positive");
  auto g = [&](double u) { return f(std::exp(u)) * std::exp(u); };
  const double ulo = std::log(t_lo);

  double peak = std::abs(g(ulo));
  double uhi = ulo;
  for (int k = 0; k < 400; ++k) {
    double v = std::abs(g(uhi + 1.0));
    peak = std::max(peak, v);
    uhi += 1.0;
    if (v <= peak * 1e-18 && k > 2) break;
  }
  if (peak == 0.0) return 0.0;

  const GaussRule& gl = gauss_legendre(16);
  auto sweep = [&](int panels_per_unit) {
    long panels = std::max<long>(1, std::lround((uhi - ulo) * panels_per_unit));
    double w = (uhi - ulo) / panels;
    double total = 0.0;
    for (long p = 0; p < panels; ++p) {
      double lo = ulo + p * w, mid = lo + 0.5 * w;
      double acc = 0.0;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k)
        acc += gl.weights[k] * g(mid + 0.5 * w * gl.nodes[k]);
      total += acc * 0.5 * w;
    }
    return total;
  };
  double prev = sweep(1);
  for (int density = 2; density <= 16; density *= 2) {
    double cur = sweep(density);
    if (std::abs(cur - prev) <= rel_tol * std::max(1e-300, std::abs(cur)))
      return cur;
    prev = cur;
  }
  return prev;
}

double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  double r = 1.0 / x, r2 = r * r;
  // asymptotic: (1/(x sqrt(pi))) (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6))
  return r / std::sqrt(M_PI) * (1.0 + r2 * (-0.5 + r2 * (0.75 - 1.875 * r2)));
}

namespace {
double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace curvebound
