#include "curvebound/curves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "curvebound/quadrature.hpp"

namespace curvebound {

namespace {

// ---- parametric representation over phi in [0, 2pi) ------------------------

struct Parametric {
  std::function<Eigen::Vector3d(double)> p, dp, ddp, dddp;
  bool analytic_frenet = true;  // flat-space closed forms available
};

Eigen::Vector3d orthogonal_unit(const Eigen::Vector3d& n) {
  Eigen::Vector3d axis = std::abs(n[0]) < 0.9 ? Eigen::Vector3d::UnitX()
                                              : Eigen::Vector3d::UnitY();
  return n.cross(axis).normalized();
}

Parametric make_circle3(const Circle3Spec& s) {
  if (!(s.radius > 0.0)) throw GeometryError("circle radius must be positive");
  Eigen::Vector3d n = s.normal.normalized();
  Eigen::Vector3d u = orthogonal_unit(n), v = n.cross(u);
  double R = s.radius;
  Point c = s.center;
  Parametric par;
  par.p = [=](double f) { return Point(c + R * (std::cos(f) * u + std::sin(f) * v)); };
  par.dp = [=](double f) { return Eigen::Vector3d(R * (-std::sin(f) * u + std::cos(f) * v)); };
  par.ddp = [=](double f) { return Eigen::Vector3d(-R * (std::cos(f) * u + std::sin(f) * v)); };
  par.dddp = [=](double f) { return Eigen::Vector3d(R * (std::sin(f) * u - std::cos(f) * v)); };
  return par;
}

Parametric make_ellipse3(const Ellipse3Spec& s) {
  if (!(s.a > 0.0 && s.b > 0.0))
    throw GeometryError("ellipse semi-axes must be positive");
  Eigen::Vector3d n = s.normal.normalized();
  Eigen::Vector3d u = orthogonal_unit(n), v = n.cross(u);
  double a = s.a, b = s.b;
  Point c = s.center;
  Parametric par;
  par.p = [=](double f) { return Point(c + a * std::cos(f) * u + b * std::sin(f) * v); };
  par.dp = [=](double f) { return Eigen::Vector3d(-a * std::sin(f) * u + b * std::cos(f) * v); };
  par.ddp = [=](double f) { return Eigen::Vector3d(-a * std::cos(f) * u - b * std::sin(f) * v); };
  par.dddp = [=](double f) { return Eigen::Vector3d(a * std::sin(f) * u - b * std::cos(f) * v); };
  return par;
}

Parametric make_torus_knot(const TorusKnotSpec& s) {
  if (!(s.major > 0.0 && s.minor > 0.0 && s.major > s.minor))
    throw GeometryError("torus knot requires 0 < minor < major");
  if (s.p == 0 || s.q == 0) throw GeometryError("torus knot winding numbers must be nonzero");
  double M = s.major, mi = s.minor;
  double p = s.p, q = s.q;
  Point c = s.center;
  Parametric par;
  par.p = [=](double f) {
    double w = M + mi * std::cos(q * f);
    return Point(c + Eigen::Vector3d(w * std::cos(p * f), w * std::sin(p * f),
                                     mi * std::sin(q * f)));
  };
  par.dp = [=](double f) {
    double w = M + mi * std::cos(q * f), dw = -mi * q * std::sin(q * f);
    return Eigen::Vector3d(dw * std::cos(p * f) - w * p * std::sin(p * f),
                           dw * std::sin(p * f) + w * p * std::cos(p * f),
                           mi * q * std::cos(q * f));
  };
  par.ddp = [=](double f) {
    double w = M + mi * std::cos(q * f);
    double dw = -mi * q * std::sin(q * f);
    double ddw = -mi * q * q * std::cos(q * f);
    double cp = std::cos(p * f), sp = std::sin(p * f);
    return Eigen::Vector3d(ddw * cp - 2.0 * dw * p * sp - w * p * p * cp,
                           ddw * sp + 2.0 * dw * p * cp - w * p * p * sp,
                           -mi * q * q * std::sin(q * f));
  };
  par.dddp = [=](double f) {
    double w = M + mi * std::cos(q * f);
    double dw = -mi * q * std::sin(q * f);
    double ddw = -mi * q * q * std::cos(q * f);
    double dddw = mi * q * q * q * std::sin(q * f);
    double cp = std::cos(p * f), sp = std::sin(p * f);
    double x = dddw * cp - 3.0 * ddw * p * sp - 3.0 * dw * p * p * cp + w * p * p * p * sp;
    double y = dddw * sp + 3.0 * ddw * p * cp - 3.0 * dw * p * p * sp - w * p * p * p * cp;
    return Eigen::Vector3d(x, y, -mi * q * q * q * std::cos(q * f));
  };
  return par;
}

Parametric make_circle2(const Circle2Spec& s) {
  if (!(s.radius > 0.0)) throw GeometryError("circle radius must be positive");
  double R = s.radius, cx = s.center[0], cy = s.center[1];
  Parametric par;
  par.p = [=](double f) { return Point(cx + R * std::cos(f), cy + R * std::sin(f), 0.0); };
  par.dp = [=](double f) { return Eigen::Vector3d(-R * std::sin(f), R * std::cos(f), 0.0); };
  par.ddp = [=](double f) { return Eigen::Vector3d(-R * std::cos(f), -R * std::sin(f), 0.0); };
  par.dddp = [=](double f) { return Eigen::Vector3d(R * std::sin(f), -R * std::cos(f), 0.0); };
  return par;
}

Parametric make_circle_h3(const CircleH3Spec& s, const Manifold& m) {
  if (!(s.radius > 0.0)) throw GeometryError("circle radius must be positive");
  if (!(s.center[2] > 0.0))
    throw GeometryError("upper half-space chart requires center z > 0");
  double a = m.curvature_scale;
  double rt = s.radius / a;
  double ze = s.center[2] * std::cosh(rt);   // Euclidean center height
  double re = s.center[2] * std::sinh(rt);   // Euclidean radius
  double x0 = s.center[0], y0 = s.center[1];
  Parametric par;
  par.analytic_frenet = false;  // curvature via the covariant derivative
  par.p = [=](double f) { return Point(x0 + re * std::sin(f), y0, ze + re * std::cos(f)); };
  par.dp = [=](double f) { return Eigen::Vector3d(re * std::cos(f), 0.0, -re * std::sin(f)); };
  par.ddp = [=](double f) { return Eigen::Vector3d(-re * std::sin(f), 0.0, -re * std::cos(f)); };
  par.dddp = [=](double f) { return Eigen::Vector3d(-re * std::cos(f), 0.0, re * std::sin(f)); };
  return par;
}

// ---- periodic cubic spline ---------------------------------------------------

// Cyclic tridiagonal solve (Sherman-Morrison around Thomas).
std::vector<double> cyclic_tridiagonal(const std::vector<double>& a,
                                       const std::vector<double>& b,
                                       const std::vector<double>& c,
                                       const std::vector<double>& d) {
  const std::size_t n = b.size();
  auto thomas = [&](std::vector<double> bb, std::vector<double> rhs) {
    std::vector<double> x(n);
    for (std::size_t i = 1; i < n; ++i) {
      double w = a[i] / bb[i - 1];
      bb[i] -= w * c[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    x[n - 1] = rhs[n - 1] / bb[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
      x[i] = (rhs[i] - c[i] * x[i + 1]) / bb[i];
    return x;
  };
  double alpha = c[n - 1], beta = a[0];
  double gamma = -b[0];
  std::vector<double> bb = b;
  bb[0] -= gamma;
  bb[n - 1] -= alpha * beta / gamma;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<double> x = thomas(bb, d);
  std::vector<double> z = thomas(bb, u);
  double vx = x[0] + beta / gamma * x[n - 1];
  double vz = z[0] + beta / gamma * z[n - 1];
  double factor = vx / (1.0 + vz);
  for (std::size_t i = 0; i < n; ++i) x[i] -= factor * z[i];
  return x;
}

struct PeriodicSpline {
  std::vector<double> knots;  // strictly increasing, period T
  double period = 0.0;
  std::vector<Eigen::Vector3d> y;
  std::vector<Eigen::Vector3d> m2;  // second derivatives at knots

  std::size_t locate(double u) const {
    auto it = std::upper_bound(knots.begin(), knots.end(), u);
    return (it == knots.begin() ? 0 : (it - knots.begin() - 1));
  }
  double wrap(double u) const {
    double w = std::fmod(u, period);
    return w < 0 ? w + period : w;
  }
  Eigen::Vector3d eval(double u, int deriv) const {
    u = wrap(u);
    std::size_t i = locate(u);
    std::size_t j = (i + 1) % y.size();
    double hi = (i + 1 < knots.size() ? knots[i + 1] : period) - knots[i];
    double A = (knots[i] + hi - u) / hi, B = (u - knots[i]) / hi;
    if (deriv == 0)
      return A * y[i] + B * y[j] +
             ((A * A * A - A) * m2[i] + (B * B * B - B) * m2[j]) * hi * hi / 6.0;
    if (deriv == 1)
      return (y[j] - y[i]) / hi +
             hi / 6.0 * ((3.0 * B * B - 1.0) * m2[j] - (3.0 * A * A - 1.0) * m2[i]);
    if (deriv == 2) return A * m2[i] + B * m2[j];
    return (m2[j] - m2[i]) / hi;  // third derivative, piecewise constant
  }
};

PeriodicSpline build_periodic_spline(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  PeriodicSpline sp;
  sp.y = pts;
  sp.knots.resize(n);
  sp.knots[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    double chord = (pts[i % n] - pts[i - 1]).norm();
    if (!(chord > 0.0))
      throw GeometryError("sampled curve has coincident consecutive points");
    if (i < n)
      sp.knots[i] = sp.knots[i - 1] + chord;
    else
      sp.period = sp.knots[n - 1] + chord;
  }
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i)
    h[i] = (i + 1 < n ? sp.knots[i + 1] : sp.period) - sp.knots[i];
  std::vector<double> a(n), b(n), c(n);
  std::vector<std::vector<double>> rhs(3, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
    a[i] = h[im] / 6.0;
    b[i] = (h[im] + h[i]) / 3.0;
    c[i] = h[i] / 6.0;
    Eigen::Vector3d r = (pts[ip] - pts[i]) / h[i] - (pts[i] - pts[im]) / h[im];
    for (int k = 0; k < 3; ++k) rhs[k][i] = r[k];
  }
  sp.m2.assign(n, Eigen::Vector3d::Zero());
  for (int k = 0; k < 3; ++k) {
    std::vector<double> mk = cyclic_tridiagonal(a, b, c, rhs[k]);
    for (std::size_t i = 0; i < n; ++i) sp.m2[i][k] = mk[i];
  }
  return sp;
}

Parametric make_sampled(const SampledSpec& spec) {
  std::vector<Point> pts = spec.points;
  if (pts.size() >= 2 && (pts.front() - pts.back()).norm() < 1e-12)
    pts.pop_back();  // explicit closure point
  if (pts.size() < 16)
    throw GeometryError("sampled curve needs at least 16 distinct points");
  double diam = 0.0;
  for (const auto& p : pts) diam = std::max(diam, (p - pts[0]).norm());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if ((pts[i] - pts[j]).norm() < 1e-10 * std::max(diam, 1.0))
        throw GeometryError("sampled curve points are not pairwise distinct");

  auto sp = std::make_shared<PeriodicSpline>(build_periodic_spline(pts));
  double scale = 2.0 * M_PI / sp->period;  // phi in [0, 2pi)
  Parametric par;
  par.p = [sp, scale](double f) { return Point(sp->eval(f / scale, 0)); };
  par.dp = [sp, scale](double f) { return Eigen::Vector3d(sp->eval(f / scale, 1) / scale); };
  par.ddp = [sp, scale](double f) {
    return Eigen::Vector3d(sp->eval(f / scale, 2) / (scale * scale));
  };
  par.dddp = [sp, scale](double f) {
    return Eigen::Vector3d(sp->eval(f / scale, 3) / (scale * scale * scale));
  };
  return par;
}

// ---- arclength reparametrization --------------------------------------------

struct ArcTable {
  std::vector<double> phi_grid;   // M+1 points over [0, 2pi]
  std::vector<double> cumulative; // arclength at phi_grid
  double total = 0.0;
  bool constant_speed = false;
  double mean_speed = 0.0;

  // dense inversion: phi at uniform s samples plus slope 1/v for Hermite eval
  std::vector<double> phi_of_s;
  std::vector<double> dphi_of_s;
  double ds = 0.0;
};

ArcTable build_arc_table(const std::function<double(double)>& speed) {
  const int M = 4096;
  const GaussRule& gl = gauss_legendre(8);
  ArcTable tab;
  tab.phi_grid.resize(M + 1);
  tab.cumulative.resize(M + 1);
  tab.cumulative[0] = 0.0;
  double h = 2.0 * M_PI / M;
  double vmin = 1e300, vmax = 0.0;
  for (int i = 0; i <= M; ++i) tab.phi_grid[i] = i * h;
  for (int i = 0; i < M; ++i) {
    double mid = (i + 0.5) * h, half = 0.5 * h;
    double acc = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      double v = speed(mid + half * gl.nodes[k]);
      if (!(v > 0.0)) throw GeometryError("curve parametrization is singular");
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
      acc += gl.weights[k] * v;
    }
    tab.cumulative[i + 1] = tab.cumulative[i] + acc * half;
  }
  tab.total = tab.cumulative[M];
  tab.mean_speed = tab.total / (2.0 * M_PI);
  tab.constant_speed = (vmax - vmin) <= 1e-13 * vmax;
  if (tab.constant_speed) return tab;

  // Newton-refined inversion samples on a uniform arclength grid.
  const int K = 16384;
  tab.phi_of_s.resize(K + 1);
  tab.dphi_of_s.resize(K + 1);
  tab.ds = tab.total / K;
  std::size_t seg = 0;
  for (int k = 0; k <= K; ++k) {
    double s = std::min(k * tab.ds, tab.total);
    while (seg + 1 < tab.cumulative.size() && tab.cumulative[seg + 1] < s) ++seg;
    double f0 = tab.phi_grid[seg];
    double c0 = tab.cumulative[seg];
    double v0 = speed(f0);
    double f = f0 + (s - c0) / v0;
    for (int it = 0; it < 4; ++it) {
      // arclength from f0 to f by a short Gauss panel
      double mid = 0.5 * (f0 + f), half = 0.5 * (f - f0);
      double arc = 0.0;
      for (std::size_t g = 0; g < gl.nodes.size(); ++g)
        arc += gl.weights[g] * speed(mid + half * gl.nodes[g]);
      arc = c0 + arc * half;
      double v = speed(f);
      double step = (arc - s) / v;
      f -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(f))) break;
    }
    tab.phi_of_s[k] = f;
    tab.dphi_of_s[k] = 1.0 / speed(f);
  }
  return tab;
}

double invert_arclength(const ArcTable& tab, double s) {
  if (tab.constant_speed) return s / tab.mean_speed;
  double x = s / tab.ds;
  int k = std::min<int>(static_cast<int>(x), tab.phi_of_s.size() - 2);
  double u = x - k;
  double h = tab.ds;
  double f0 = tab.phi_of_s[k], f1 = tab.phi_of_s[k + 1];
  double d0 = tab.dphi_of_s[k] * h, d1 = tab.dphi_of_s[k + 1] * h;
  double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * f0 + (u3 - 2 * u2 + u) * d0 +
         (-2 * u3 + 3 * u2) * f1 + (u3 - u2) * d1;
}

}  // namespace

CurveSpec scale_spec(const CurveSpec& spec, double factor) {
  if (!(factor > 0.0)) throw GeometryError("scale factor must be positive");
  return std::visit(
      [&](const auto& s) -> CurveSpec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle3Spec>) {
          Circle3Spec r = s;
          r.radius *= factor;
          r.center *= factor;
          return r;
        } else if constexpr (std::is_same_v<T, Ellipse3Spec>) {
          Ellipse3Spec r = s;
          r.a *= factor;
          r.b *= factor;
          r.center *= factor;
          return r;
        } else if constexpr (std::is_same_v<T, TorusKnotSpec>) {
          TorusKnotSpec r = s;
          r.major *= factor;
          r.minor *= factor;
          r.center *= factor;
          return r;
        } else if constexpr (std::is_same_v<T, Circle2Spec>) {
          Circle2Spec r = s;
          r.radius *= factor;
          r.center *= factor;
          return r;
        } else if constexpr (std::is_same_v<T, SampledSpec>) {
          SampledSpec r = s;
          for (auto& p : r.points) p *= factor;
          return r;
        } else {
          throw GeometryError("coordinate scaling is only defined on flat backends");
        }
      },
      spec);
}

Point Curve::eval(double s) const {
  double w = std::fmod(s, length_);
  if (w < 0) w += length_;
  return eval_(w);
}

Eigen::Vector3d Curve::unit_tangent(double s) const {
  double w = std::fmod(s, length_);
  if (w < 0) w += length_;
  return tangent_(w);
}

Curve build_curve(const CurveSpec& spec, const Manifold& m, int nodes) {
  if (nodes < 32) throw ScenarioError("curve quadrature requires nodes >= 32");

  // dimension / backend compatibility
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle2Spec>) {
          if (m.kind != ManifoldKind::EuclideanPlane)
            throw ScenarioError("planar circle requires the plane backend");
        } else if constexpr (std::is_same_v<T, CircleH3Spec>) {
          if (m.kind != ManifoldKind::HyperbolicSpace3)
            throw ScenarioError("hyperbolic circle requires the hyperbolic backend");
        } else if constexpr (std::is_same_v<T, SampledSpec>) {
          // allowed on every backend; points validated below
        } else {
          if (m.kind != ManifoldKind::EuclideanSpace3 &&
              m.kind != ManifoldKind::FlatTorus3)
            throw ScenarioError("3-space curve spec on incompatible backend");
        }
      },
      spec);

  Parametric par = std::visit(
      [&](const auto& s) -> Parametric {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle3Spec>) return make_circle3(s);
        else if constexpr (std::is_same_v<T, Ellipse3Spec>) return make_ellipse3(s);
        else if constexpr (std::is_same_v<T, TorusKnotSpec>) return make_torus_knot(s);
        else if constexpr (std::is_same_v<T, Circle2Spec>) return make_circle2(s);
        else if constexpr (std::is_same_v<T, CircleH3Spec>) return make_circle_h3(s, m);
        else return make_sampled(s);
      },
      spec);
  if (m.kind == ManifoldKind::HyperbolicSpace3) par.analytic_frenet = false;

  for (double f : {0.0, 1.0, 2.5, 4.0, 5.5}) validate_point(m, par.p(f));

  auto speed = [&m, &par](double f) { return metric_norm(m, par.p(f), par.dp(f)); };
  ArcTable tab = build_arc_table(speed);

  Curve c;
  c.manifold_ = m;
  c.length_ = tab.total;
  c.param_error_ = tab.constant_speed ? 0.0 : tab.total * 1e-12;

  auto table = std::make_shared<ArcTable>(std::move(tab));
  auto parp = std::make_shared<Parametric>(std::move(par));
  c.eval_ = [table, parp](double s) { return parp->p(invert_arclength(*table, s)); };
  c.tangent_ = [table, parp, m](double s) {
    double f = invert_arclength(*table, s);
    Eigen::Vector3d dp = parp->dp(f);
    return Eigen::Vector3d(dp / metric_norm(m, parp->p(f), dp));
  };

  c.nodes_.resize(nodes);
  c.node_points_.resize(nodes);
  double h = c.length_ / nodes;
  for (int i = 0; i < nodes; ++i) {
    c.nodes_[i] = i * h;
    c.node_points_[i] = c.eval_(c.nodes_[i]);
  }

  // unit-speed validation at the nodes
  for (int i = 0; i < nodes; ++i) {
    double g = metric_norm(m, c.node_points_[i], c.tangent_(c.nodes_[i]));
    if (std::abs(g - 1.0) > 1e-6)
      throw InvariantError("arclength parametrization failed unit-speed check");
  }

  // Frenet data at the nodes
  CurveFrenetData fr;
  fr.curvature.resize(nodes);
  fr.torsion.resize(nodes);
  fr.frames.resize(nodes);
  if (parp->analytic_frenet) {
    // flat backends: closed-form chain rule through the arclength map
    for (int i = 0; i < nodes; ++i) {
      double f = invert_arclength(*table, c.nodes_[i]);
      Eigen::Vector3d dp = parp->dp(f);
      Eigen::Vector3d ddp = parp->ddp(f), dddp = parp->dddp(f);
      double v = dp.norm();
      double vp = dp.dot(ddp) / v;
      double vpp = (ddp.squaredNorm() + dp.dot(dddp)) / v - vp * vp / v;
      double fp = 1.0 / v;
      double fpp = -vp / (v * v * v);
      double fppp = (3.0 * vp * vp - vpp * v) / (v * v * v * v * v);
      Eigen::Vector3d g1 = dp * fp;
      Eigen::Vector3d g2 = ddp * fp * fp + dp * fpp;
      Eigen::Vector3d g3 = dddp * fp * fp * fp + 3.0 * ddp * fp * fpp + dp * fppp;
      double kappa = g2.norm();
      fr.curvature[i] = kappa;
      FrenetFrame frame;
      frame.tangent = g1;
      if (kappa > 1e-12) {
        frame.normal = g2 / kappa;
        frame.binormal = frame.tangent.cross(frame.normal);
        fr.torsion[i] = g1.cross(g2).dot(g3) / (kappa * kappa);
      } else {
        frame.normal = orthogonal_unit(g1);
        frame.binormal = frame.tangent.cross(frame.normal);
        fr.torsion[i] = 0.0;
      }
      fr.frames[i] = frame;
    }
    fr.accuracy = 1e-12;
  } else {
    // covariant derivative of the unit tangent by central differences
    double fd = 1e-5 * c.length_;
    double worst = 0.0;
    auto conformal = [&](const Point& x) {
      return metric_norm(m, x, Eigen::Vector3d::UnitX());
    };
    // Christoffel action on a pair by polarization of the quadratic form.
    auto gamma_pair = [&](const Point& x, const Eigen::Vector3d& u,
                          const Eigen::Vector3d& v) {
      Eigen::Vector3d zero = Eigen::Vector3d::Zero();
      return 0.5 * (covariant_acceleration(m, x, u + v, zero) -
                    covariant_acceleration(m, x, u, zero) -
                    covariant_acceleration(m, x, v, zero));
    };
    auto cov_tangent_deriv = [&](double s, double step) {
      Point x = c.eval_(s);
      Eigen::Vector3d t0 = c.tangent_(s);
      Eigen::Vector3d dt = (c.tangent_(s + step) - c.tangent_(s - step)) / (2.0 * step);
      return std::pair<Point, Eigen::Vector3d>(x, covariant_acceleration(m, x, t0, dt));
    };
    auto unit_normal = [&](double s, double step) {
      auto [x, acc] = cov_tangent_deriv(s, step);
      double n = metric_norm(m, x, acc);
      return n > 1e-14 ? Eigen::Vector3d(acc / n) : orthogonal_unit(c.tangent_(s));
    };
    for (int i = 0; i < nodes; ++i) {
      double s = c.nodes_[i];
      auto [x, acc] = cov_tangent_deriv(s, fd);
      double k1 = metric_norm(m, x, acc);
      auto [x2, acc2] = cov_tangent_deriv(s, 0.5 * fd);
      double kappa = metric_norm(m, x2, acc2);
      worst = std::max(worst, std::abs(k1 - kappa));
      FrenetFrame frame;
      frame.tangent = c.tangent_(s);
      frame.normal = kappa > 1e-14 ? Eigen::Vector3d(acc2 / kappa)
                                   : orthogonal_unit(frame.tangent);
      double w = conformal(x);
      frame.binormal = w * frame.tangent.cross(frame.normal);
      // tau = g(nabla_t n, b)
      Eigen::Vector3d dn =
          (unit_normal(s + fd, fd) - unit_normal(s - fd, fd)) / (2.0 * fd);
      Eigen::Vector3d nab_n = dn + gamma_pair(x, frame.tangent, frame.normal);
      fr.curvature[i] = kappa;
      fr.torsion[i] = w * w * nab_n.dot(frame.binormal);
      fr.frames[i] = frame;
    }
    fr.accuracy = worst;
  }
  fr.curvature_max = *std::max_element(fr.curvature.begin(), fr.curvature.end());
  c.frenet_ = std::move(fr);

  // self-intersection scan at node resolution
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 4; j < nodes && j - i <= nodes - 4; ++j) {
      double d = geodesic_distance(m, c.node_points_[i], c.node_points_[j]);
      if (d < 1e-7 * c.length_)
        throw GeometryError("curve is self-intersecting at node resolution");
    }

  c.self_gap_ = certify_self_gap(c);
  return c;
}

SelfGapCertificate certify_self_gap(const Curve& c) {
  const Manifold& m = c.manifold();
  double L = c.length();
  double kmax = c.frenet().curvature_max;
  double cap = kmax > 1e-12 ? std::min(L / 4.0, 0.99 / (2.0 * kmax)) : L / 4.0;

  const int n_s = 256, n_xi = 96;
  std::vector<double> xis;
  xis.reserve(2 * n_xi);
  for (int k = 0; k < n_xi; ++k) {
    xis.push_back(cap * std::pow(10.0, -5.0 * (n_xi - 1 - k) / (n_xi - 1)));
    xis.push_back(cap * (k + 1) / n_xi);
  }
  std::sort(xis.begin(), xis.end());

  std::vector<std::vector<double>> dist(n_s, std::vector<double>(xis.size()));
  for (int i = 0; i < n_s; ++i) {
    double s = i * L / n_s;
    Point x = c.eval(s);
    for (std::size_t k = 0; k < xis.size(); ++k) {
      double d = geodesic_distance(m, x, c.eval(s + xis[k]));
      dist[i][k] = d;
      if (d > xis[k] * (1.0 + 1e-7) + 1e-12)
        throw InvariantError("geodesic distance exceeded arclength separation");
    }
  }

  auto admissible = [&](double delta) {
    double shrink = kmax > 1e-12 ? std::sqrt(1.0 - kmax * delta) : 1.0;
    for (int i = 0; i < n_s; ++i)
      for (std::size_t k = 0; k < xis.size() && xis[k] <= delta; ++k)
        if (dist[i][k] < shrink * xis[k] * (1.0 - 1e-9) - 1e-14) return false;
    return true;
  };

  SelfGapCertificate cert;
  const int steps = 400;
  for (int k = 0; k <= steps; ++k) {
    double delta = cap * (steps - k) / steps;
    if (delta <= 0.0) break;
    if (admissible(delta)) {
      cert.delta = delta;
      cert.shrink = kmax > 1e-12 ? std::sqrt(1.0 - kmax * delta) : 1.0;
      cert.min_beyond = min_distance_beyond(c, delta);
      return cert;
    }
  }
  throw GeometryError(
      "no admissible near-regime radius at this resolution; increase nodes");
}

double min_distance_beyond(const Curve& c, double delta) {
  const Manifold& m = c.manifold();
  double L = c.length();
  if (!(delta > 0.0 && delta < L / 2.0))
    throw GeometryError("near-regime radius must lie in (0, L/2)");
  const int n_s = 256, n_xi = 192;
  double best = 1e300, best_s = 0.0, best_xi = 0.0;
  double lo = delta * (1.0 + 1e-9), hi = L / 2.0;
  for (int i = 0; i < n_s; ++i) {
    double s = i * L / n_s;
    Point x = c.eval(s);
    for (int k = 0; k <= n_xi; ++k) {
      double xi = lo + (hi - lo) * k / n_xi;
      double d = geodesic_distance(m, x, c.eval(s + xi));
      if (d < best) {
        best = d;
        best_s = s;
        best_xi = xi;
      }
    }
  }
  // local refinement around the coarse minimum
  double hs = L / n_s, hxi = (hi - lo) / n_xi;
  for (int round = 0; round < 6; ++round) {
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b) {
        double s = best_s + a * hs / 2.0;
        double xi = std::clamp(best_xi + b * hxi / 2.0, lo, hi);
        double d = geodesic_distance(m, c.eval(s), c.eval(s + xi));
        if (d < best) {
          best = d;
          best_s = s;
          best_xi = xi;
        }
      }
    hs *= 0.5;
    hxi *= 0.5;
  }
  return best;
}

SampledSpec read_sampled_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open sampled-curve file: " + path);
  SampledSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x, y, z;
    if (ls >> x >> y) {
      if (!(ls >> z)) z = 0.0;
      spec.points.emplace_back(x, y, z);
    }
  }
  if (spec.points.empty())
    throw ScenarioError("sampled-curve file contains no points: " + path);
  return spec;
}

}  // namespace curvebound
