#include "curvebound/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace curvebound {

namespace {

struct EigenPoint {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

EigenPoint eigen_decompose(const Eigen::MatrixXd& phi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(phi);
  if (solver.info() != Eigen::Success)
    throw InvariantError("eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// Root of a strictly decreasing function with f(a) > 0 > f(b), a < b.
// Illinois-damped false position with a bisection safeguard.
template <class F>
double monotone_root(const F& f, double a, double fa, double b, double fb,
                     double rel_tol) {
  int side = 0;
  for (int it = 0; it < 240; ++it) {
    if (b - a <= rel_tol * std::abs(b) || fa == fb) break;
    double x = (a * fb - b * fa) / (fb - fa);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    double fx = f(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) {
      a = x;
      fa = fx;
      if (side == 1) fb *= 0.5;
      side = 1;
    } else {
      b = x;
      fb = fx;
      if (side == -1) fa *= 0.5;
      side = -1;
    }
  }
  return 0.5 * (a + b);
}

void orient_positive(Eigen::VectorXd& v) {
  if (v.sum() < 0.0) v = -v;
}

// The eigensolver cannot resolve components far below machine precision
// even though the lowest-eigenvalue vector of a matrix with strictly
// negative off-diagonal entries is strictly positive.  Power iterations
// with the entrywise-nonnegative shift sigma I - Phi restore the sign
// structure: sums and products of positives stay positive, and the
// dominant eigenvector of the shifted matrix is exactly the sought one.
Eigen::VectorXd perron_refine(const Eigen::MatrixXd& phi, Eigen::VectorXd a0) {
  const int n = static_cast<int>(phi.rows());
  if (n == 1) return Eigen::VectorXd::Ones(1);
  double sigma =
      phi.diagonal().maxCoeff() + phi.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  Eigen::MatrixXd shifted = -phi;
  shifted.diagonal().array() += sigma;
  orient_positive(a0);
  a0 = a0.cwiseMax(0.0);
  if (!(a0.maxCoeff() > 0.0)) a0.setOnes();
  for (int it = 0; it < 12; ++it) {
    a0 = shifted * a0;
    a0 /= a0.norm();
  }
  return a0;
}

}  // namespace

EigenFlow eigen_flow(const PrincipalMatrix& phi, const std::vector<double>& grid) {
  if (grid.size() < 1) throw ScenarioError("energy grid is empty");
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k] < grid[k + 1]))
      throw ScenarioError("energy grid must be strictly increasing");
  if (!(grid.back() < 0.0)) throw ScenarioError("energy grid must stay below zero");

  const int n = static_cast<int>(phi.system().size());
  EigenFlow flow;
  flow.energies = grid;
  flow.eigenvalues.resize(grid.size(), n);
  flow.slopes.resize(grid.size(), n);
  flow.eigenvectors.resize(grid.size());

  Eigen::MatrixXd prev_vectors;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    EigenPoint ep = eigen_decompose(phi.matrix(grid[g]));
    Eigen::MatrixXd dphi = phi.derivative(grid[g]);
    for (int k = 0; k < n; ++k) {
      flow.eigenvalues(g, k) = ep.values[k];
      Eigen::VectorXd a = ep.vectors.col(k);
      flow.slopes(g, k) = a.dot(dphi * a);
    }
    if (g > 0) {
      Eigen::MatrixXd overlap = prev_vectors.transpose() * ep.vectors;
      for (int k = 0; k < n; ++k) {
        int arg = 0;
        double best = 0.0;
        for (int j = 0; j < n; ++j)
          if (std::abs(overlap(k, j)) > best) {
            best = std::abs(overlap(k, j));
            arg = j;
          }
        if (arg != k || best < 0.9) {
          flow.flagged_crossings.push_back(static_cast<int>(g));
          break;
        }
      }
    }
    prev_vectors = ep.vectors;
    flow.eigenvectors[g] = std::move(ep.vectors);
  }
  return flow;
}

SpectralSolution solve_ground_state(const PrincipalMatrix& phi, double e_min) {
  const Scheme& scheme = phi.system().scheme;
  if (!std::holds_alternative<BoundState3D>(scheme) &&
      !std::holds_alternative<Finite2D>(scheme))
    throw SchemeError("ground-state solve requires the bound-state or 2D scheme");

  auto omega0 = [&](double e) {
    return eigen_decompose(phi.matrix(e)).values[0];
  };

  double e_top, w_top;
  if (std::holds_alternative<BoundState3D>(scheme)) {
    e_top = phi.energy_ceiling();  // -max nu^2; the lowest eigenvalue is <= 0 here
    w_top = omega0(e_top);
  } else {
    // 2D: expand the bracket top toward zero until the lowest eigenvalue
    // turns negative (the diagonal diverges to -inf as E -> 0-).
    e_top = -1.0;
    w_top = omega0(e_top);
    for (int k = 0; k < 40 && w_top > 0.0 && e_top < -1e-12; ++k) {
      e_top = std::max(e_top * 0.25, -1e-12);
      w_top = omega0(e_top);
    }
    if (w_top > 0.0)
      throw NoRootError("no bound state found in the configured energy range");
  }

  SpectralSolution sol;
  double e_ground;
  double scale = std::max(1.0, phi.matrix(e_top).cwiseAbs().maxCoeff());
  if (std::abs(w_top) <= 1e-12 * scale) {
    // on-shell zero of an isolated (or fully decoupled) curve
    e_ground = e_top;
    sol.bracket = {e_top, e_top};
  } else {
    if (w_top > 0.0)
      throw InvariantError("lowest eigenvalue positive at the scheme ceiling");
    double e_lo = e_top;
    double w_lo = w_top;
    double offset = 1e-3 * std::abs(e_top);
    for (int k = 0; k < 80 && w_lo <= 0.0; ++k) {
      e_lo = e_top - offset;
      offset *= 2.0;
      if (e_lo < e_min)
        throw NoRootError("no sign change of the lowest eigenvalue above e_min");
      w_lo = omega0(e_lo);
    }
    if (w_lo <= 0.0)
      throw NoRootError("no sign change of the lowest eigenvalue above e_min");
    e_ground = monotone_root(omega0, e_lo, w_lo, e_top, w_top, 1e-10);
    sol.bracket = {e_lo, e_top};
  }

  Eigen::MatrixXd m_ground = phi.matrix(e_ground);
  EigenPoint ep = eigen_decompose(m_ground);
  Eigen::VectorXd a0 = perron_refine(m_ground, ep.vectors.col(0));
  Eigen::MatrixXd dphi = phi.derivative(e_ground);

  sol.e_ground = e_ground;
  sol.ground_vector = a0;
  sol.omega_slope = a0.dot(dphi * a0);
  sol.normalization = 1.0 / std::sqrt(std::abs(sol.omega_slope));
  sol.residual = std::abs(ep.values[0]);
  return sol;
}

GershgorinBound gershgorin_lower_bound(const PrincipalMatrix& phi, double e_min) {
  const auto& sys = phi.system();
  if (sys.size() < 2)
    throw SchemeError("the disk bound requires at least two curves");
  if (!std::holds_alternative<BoundState3D>(sys.scheme))
    throw SchemeError("the disk bound requires the bound-state scheme");

  auto margin = [&](double e) {
    Eigen::MatrixXd m = phi.matrix(e);
    double worst = 1e300;
    for (int i = 0; i < m.rows(); ++i) {
      double radius = 0.0;
      for (int j = 0; j < m.cols(); ++j)
        if (j != i) radius += std::abs(m(i, j));
      worst = std::min(worst, m(i, i) - radius);
    }
    return worst;
  };

  double e_top = phi.energy_ceiling();
  double g_top = margin(e_top);
  GershgorinBound bound;
  if (std::abs(g_top) <= 1e-12) {
    bound.e_star = e_top;
  } else {
    double e_lo = e_top, g_lo = g_top;
    double offset = 1e-3 * std::abs(e_top);
    for (int k = 0; k < 80 && g_lo <= 0.0; ++k) {
      e_lo = e_top - offset;
      offset *= 2.0;
      if (e_lo < e_min)
        throw NoRootError(
            "disk criterion not satisfied above e_min; quadrature failure suspected");
      g_lo = margin(e_lo);
    }
    if (g_lo <= 0.0)
      throw NoRootError(
          "disk criterion not satisfied above e_min; quadrature failure suspected");
    bound.e_star = monotone_root(margin, e_lo, g_lo, e_top, g_top, 1e-10);
  }

  for (double off : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
    double e = bound.e_star - off;
    bound.certificate.push_back({e, margin(e)});
  }
  return bound;
}

std::vector<double> ground_state_wavefunction(
    const SpectralSolution& sol, const CurveSystem& sys,
    const std::vector<Point>& points, const QuadratureConfig& cfg,
    std::vector<std::uint8_t>* near_support) {
  double kappa = std::sqrt(-sol.e_ground);
  const std::size_t n_curves = sys.size();
  std::vector<double> psi(points.size(), 0.0);
  if (near_support) near_support->assign(points.size(), 0);

  parallel_for(points.size(), cfg.threads, [&](std::size_t p) {
    const Point& x = points[p];
    double acc = 0.0;
    bool warn = false;
    for (std::size_t i = 0; i < n_curves; ++i) {
      const Curve& c = sys.curves[i];
      double h = c.length() / c.node_points().size();
      double line = 0.0;
      for (const Point& y : c.node_points()) {
        double d = geodesic_distance(sys.manifold, x, y);
        if (d < 1e-6 * c.length()) warn = true;
        if (d < 1e-14 * c.length()) {
          line = std::numeric_limits<double>::infinity();
          break;
        }
        line += resolvent_kernel(sys.manifold, kappa, x, y);
      }
      acc += sol.ground_vector[i] / std::sqrt(c.length()) * line * h;
    }
    psi[p] = sol.normalization * acc;
    if (near_support && warn) (*near_support)[p] = 1;
  });
  return psi;
}

PositivityReport positivity_check(const SpectralSolution& sol,
                                  const PrincipalMatrix& phi) {
  PositivityReport rep;
  Eigen::MatrixXd m = phi.matrix(sol.e_ground);
  const int n = static_cast<int>(m.rows());
  rep.offdiag_negative = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && !(m(i, j) < 0.0)) rep.offdiag_negative = false;
  rep.min_component = sol.ground_vector.minCoeff();
  rep.components_positive = rep.min_component > 0.0;
  EigenPoint ep = eigen_decompose(m);
  rep.spectral_gap = n > 1 ? ep.values[1] - ep.values[0]
                           : std::numeric_limits<double>::infinity();
  rep.ground_simple = rep.spectral_gap > 0.0;
  rep.passed = rep.offdiag_negative && rep.components_positive && rep.ground_simple;
  if (!rep.passed)
    throw InvariantError("ground-state positivity check failed");
  return rep;
}

double l2_norm_over_box(const SpectralSolution& sol, const CurveSystem& sys,
                        const Point& lo, const Point& hi, int n_per_axis,
                        const QuadratureConfig& cfg) {
  if (n_per_axis < 2) throw ScenarioError("box grid needs at least 2 points per axis");
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n_per_axis) * n_per_axis * n_per_axis);
  Eigen::Vector3d step = (hi - lo) / (n_per_axis - 1);
  for (int a = 0; a < n_per_axis; ++a)
    for (int b = 0; b < n_per_axis; ++b)
      for (int c = 0; c < n_per_axis; ++c)
        pts.emplace_back(lo + Eigen::Vector3d(a * step[0], b * step[1], c * step[2]));
  std::vector<double> psi = ground_state_wavefunction(sol, sys, pts, cfg);
  double acc = 0.0;
  std::size_t idx = 0;
  for (int a = 0; a < n_per_axis; ++a)
    for (int b = 0; b < n_per_axis; ++b)
      for (int c = 0; c < n_per_axis; ++c, ++idx) {
        double w = 1.0;
        w *= (a == 0 || a == n_per_axis - 1) ? 0.5 : 1.0;
        w *= (b == 0 || b == n_per_axis - 1) ? 0.5 : 1.0;
        w *= (c == 0 || c == n_per_axis - 1) ? 0.5 : 1.0;
        acc += w * psi[idx] * psi[idx];
      }
  return std::sqrt(acc * step.prod());
}

}  // namespace curvebound
