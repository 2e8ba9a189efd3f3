#include "curvebound/principal_operator.hpp"

#include <cmath>

#include "curvebound/quadrature.hpp"

namespace curvebound {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * M_PI);

void require_negative_energy(double energy) {
  if (!(energy < 0.0))
    throw SchemeError("energy must be negative; the continued form for E >= 0 is out of range");
}

// Graded-panel floor: resolve the shortest kernel scale in play while
// keeping a hard relative floor.
double graded_min_scale(double half_len, double q_max, double layer,
                        const QuadratureConfig& cfg) {
  double ms = half_len / 10.0;
  if (q_max > 0.0) ms = std::min(ms, 0.05 / q_max);
  if (layer > 0.0) ms = std::min(ms, 0.3 * layer);
  return std::max(ms, half_len * cfg.panel_min_rel);
}

// (1/L) \iint f ds ds' for a pair kernel finite at coincidence: outer
// trapezoid over the arclength nodes, inner graded panels over the arc
// separation u with both branches s +- u.
template <class PairTerm>
double diag_double_integral(const Curve& c, const QuadratureConfig& cfg,
                            double min_scale, const PairTerm& term) {
  const auto& nodes = c.nodes();
  const double L = c.length();
  const double h = L / nodes.size();
  std::vector<double> partial(nodes.size());
  parallel_for(nodes.size(), cfg.threads, [&](std::size_t i) {
    double s = nodes[i];
    const Point& x = c.node_points()[i];
    partial[i] = integrate_graded(
        0.5 * L, min_scale, cfg.panel_order,
        [&](double u) { return term(c.eval(s + u), x, u) + term(c.eval(s - u), x, u); });
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total * h / L;
}

// \iint f ds ds' over two distinct curves by the periodic trapezoid rule.
template <class PairTerm>
double cross_double_integral(const Curve& a, const Curve& b,
                             const QuadratureConfig& cfg, const PairTerm& term) {
  const auto& pa = a.node_points();
  const auto& pb = b.node_points();
  const double ha = a.length() / pa.size();
  const double hb = b.length() / pb.size();
  std::vector<double> partial(pa.size());
  parallel_for(pa.size(), cfg.threads, [&](std::size_t i) {
    double acc = 0.0;
    for (const auto& q : pb) acc += term(pa[i], q);
    partial[i] = acc;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total * ha * hb;
}

const BoundState3D& as_bound_state(const Scheme& s) {
  const auto* bs = std::get_if<BoundState3D>(&s);
  if (!bs) throw SchemeError("operation requires the bound-state scheme");
  return *bs;
}

}  // namespace

double phi_offdiag(const CurveSystem& sys, int i, int j, double energy,
                   const QuadratureConfig& cfg) {
  require_negative_energy(energy);
  if (i == j) throw SchemeError("off-diagonal entry requires distinct curves");
  double kappa = std::sqrt(-energy);
  const Curve& a = sys.curves[i];
  const Curve& b = sys.curves[j];
  double integral = cross_double_integral(
      a, b, cfg, [&](const Point& x, const Point& y) {
        return resolvent_kernel(sys.manifold, kappa, x, y);
      });
  return -integral / std::sqrt(a.length() * b.length());
}

double phi_diag_boundstate(const CurveSystem& sys, int i, double energy,
                           const QuadratureConfig& cfg) {
  require_negative_energy(energy);
  const auto& bs = as_bound_state(sys.scheme);
  double nu = bs.nu[i];
  double kappa = std::sqrt(-energy);
  const Curve& c = sys.curves[i];
  double ms = graded_min_scale(0.5 * c.length(), std::max(nu, kappa), 0.0, cfg);
  return diag_double_integral(
      c, cfg, ms, [&](const Point& x, const Point& y, double) {
        return resolvent_difference(sys.manifold, nu, kappa, x, y);
      });
}

double phi_rg_subtracted(const Curve& c, double inv_lambda_R, double mu,
                         double energy, const QuadratureConfig& cfg) {
  require_negative_energy(energy);
  if (c.manifold().kind != ManifoldKind::EuclideanSpace3)
    throw SchemeError("subtracted scheme is restricted to flat 3-space");
  if (!(mu > 0.0)) throw SchemeError("reference scale must be positive");
  double kappa = std::sqrt(-energy);
  double L = c.length();
  // straightened-curve images beyond the principal one
  int n_images = static_cast<int>(std::ceil(45.0 / (mu * L) + 1.0));
  auto image_tail = [&](double u) {
    double acc = 0.0;
    for (int n = 1; n <= n_images; ++n) {
      double a = n * L + u, b = n * L - u;
      acc += std::exp(-mu * a) * kInv4Pi / a + std::exp(-mu * b) * kInv4Pi / b;
    }
    return acc;
  };
  double ms = graded_min_scale(0.5 * L, std::max(mu, kappa), 0.0, cfg);
  double integral = diag_double_integral(
      c, cfg, ms, [&](const Point& x, const Point& y, double u) {
        double r = (x - y).norm();
        double n0;
        if (u < 1e-9 * L) {
          n0 = (kappa - mu) * kInv4Pi;
        } else {
          // e^{-mu u}/(4 pi u) - e^{-kappa r}/(4 pi r), cancellation-free
          double dr = r - u;
          double t1 = -std::exp(-mu * u) *
                      std::expm1((mu - kappa) * u - kappa * dr) * kInv4Pi / u;
          double t2 = std::exp(-kappa * r) * dr * kInv4Pi / (u * r);
          n0 = t1 + t2;
        }
        return n0 + image_tail(u);
      });
  return inv_lambda_R + integral;
}

Eigen::MatrixXd phi_finite2d(const CurveSystem& sys, double energy,
                             const QuadratureConfig& cfg) {
  require_negative_energy(energy);
  const auto* f2 = std::get_if<Finite2D>(&sys.scheme);
  if (!f2) throw SchemeError("operation requires the two-dimensional scheme");
  double kappa = std::sqrt(-energy);
  const int n = static_cast<int>(sys.size());
  Eigen::MatrixXd phi(n, n);
  for (int i = 0; i < n; ++i) {
    const Curve& c = sys.curves[i];
    // logarithmic coincidence singularity: grade all the way down
    double ms = 0.5 * c.length() * cfg.panel_min_rel;
    double integral = diag_double_integral(
        c, cfg, ms, [&](const Point& x, const Point& y, double) {
          return resolvent_kernel(sys.manifold, kappa, x, y);
        });
    phi(i, i) = 1.0 / f2->lambda[i] - integral;
    for (int j = i + 1; j < n; ++j)
      phi(i, j) = phi(j, i) = phi_offdiag(sys, i, j, energy, cfg);
  }
  return phi;
}

double regularized_inv_coupling(const CurveSystem& sys, int i,
                                const Regularized& reg,
                                const QuadratureConfig& cfg) {
  const Curve& c = sys.curves[i];
  double q_mu = std::sqrt(reg.mu * reg.mu + reg.eps);
  double ms = graded_min_scale(0.5 * c.length(), q_mu, std::sqrt(reg.eps), cfg);
  double integral = diag_double_integral(
      c, cfg, ms, [&](const Point& x, const Point& y, double) {
        return truncated_resolvent(sys.manifold, q_mu, reg.eps, x, y);
      });
  return reg.inv_lambda_R + integral;
}

double phi_regularized_diag_raw(const CurveSystem& sys, int i, double eps,
                                double inv_lambda_eps, double energy,
                                const QuadratureConfig& cfg) {
  require_negative_energy(energy);
  const Curve& c = sys.curves[i];
  double q_k = std::sqrt(-energy + eps);
  double ms = graded_min_scale(0.5 * c.length(), q_k, std::sqrt(eps), cfg);
  double integral = diag_double_integral(
      c, cfg, ms, [&](const Point& x, const Point& y, double) {
        return truncated_resolvent(sys.manifold, q_k, eps, x, y);
      });
  return inv_lambda_eps - integral;
}

Eigen::MatrixXd phi_regularized(const CurveSystem& sys, const Regularized& reg,
                                double energy, const QuadratureConfig& cfg) {
  require_negative_energy(energy);
  const int n = static_cast<int>(sys.size());
  double q_mu = std::sqrt(reg.mu * reg.mu + reg.eps);
  double q_k = std::sqrt(-energy + reg.eps);
  Eigen::MatrixXd phi(n, n);
  for (int i = 0; i < n; ++i) {
    const Curve& c = sys.curves[i];
    // combined subtraction: 1/lambda_R + (1/L) iint [T_eps(q_mu) - T_eps(q_k)]
    double layer = std::sqrt(reg.eps);
    double ms = graded_min_scale(0.5 * c.length(), std::max(q_mu, q_k), layer, cfg);
    double integral = diag_double_integral(
        c, cfg, ms, [&](const Point& x, const Point& y, double) {
          return truncated_resolvent(sys.manifold, q_mu, reg.eps, x, y) -
                 truncated_resolvent(sys.manifold, q_k, reg.eps, x, y);
        });
    phi(i, i) = reg.inv_lambda_R + integral;
    for (int j = i + 1; j < n; ++j) {
      const Curve& b = sys.curves[j];
      double off = cross_double_integral(
          c, b, cfg, [&](const Point& x, const Point& y) {
            return truncated_resolvent(sys.manifold, q_k, reg.eps, x, y);
          });
      phi(i, j) = phi(j, i) = -off / std::sqrt(c.length() * b.length());
    }
  }
  return phi;
}

Eigen::MatrixXd phi_derivative(const CurveSystem& sys, double energy,
                               const QuadratureConfig& cfg) {
  require_negative_energy(energy);
  double kappa = std::sqrt(-energy);
  const int n = static_cast<int>(sys.size());
  Eigen::MatrixXd dphi(n, n);
  const auto* reg = std::get_if<Regularized>(&sys.scheme);
  for (int i = 0; i < n; ++i) {
    const Curve& c = sys.curves[i];
    double integral;
    if (reg) {
      double q_k = std::sqrt(-energy + reg->eps);
      double ms = graded_min_scale(0.5 * c.length(), q_k, std::sqrt(reg->eps), cfg);
      integral = diag_double_integral(
          c, cfg, ms, [&](const Point& x, const Point& y, double) {
            return truncated_resolvent_tweight(sys.manifold, q_k, reg->eps, x, y);
          });
    } else {
      double ms = graded_min_scale(0.5 * c.length(), kappa, 0.0, cfg);
      integral = diag_double_integral(
          c, cfg, ms, [&](const Point& x, const Point& y, double) {
            return resolvent_denergy(sys.manifold, kappa, x, y);
          });
    }
    dphi(i, i) = -integral;
    for (int j = i + 1; j < n; ++j) {
      const Curve& b = sys.curves[j];
      double off;
      if (reg) {
        double q_k = std::sqrt(-energy + reg->eps);
        off = cross_double_integral(
            c, b, cfg, [&](const Point& x, const Point& y) {
              return truncated_resolvent_tweight(sys.manifold, q_k, reg->eps, x, y);
            });
      } else {
        off = cross_double_integral(
            c, b, cfg, [&](const Point& x, const Point& y) {
              return resolvent_denergy(sys.manifold, kappa, x, y);
            });
      }
      dphi(i, j) = dphi(j, i) = -off / std::sqrt(c.length() * b.length());
    }
  }
  return dphi;
}

Eigen::MatrixXd assemble_phi(const CurveSystem& sys, double energy,
                             const QuadratureConfig& cfg) {
  require_negative_energy(energy);
  const int n = static_cast<int>(sys.size());
  return std::visit(
      [&](const auto& sch) -> Eigen::MatrixXd {
        using T = std::decay_t<decltype(sch)>;
        if constexpr (std::is_same_v<T, BoundState3D>) {
          Eigen::MatrixXd phi(n, n);
          for (int i = 0; i < n; ++i) {
            phi(i, i) = phi_diag_boundstate(sys, i, energy, cfg);
            for (int j = i + 1; j < n; ++j)
              phi(i, j) = phi(j, i) = phi_offdiag(sys, i, j, energy, cfg);
          }
          return phi;
        } else if constexpr (std::is_same_v<T, Finite2D>) {
          return phi_finite2d(sys, energy, cfg);
        } else if constexpr (std::is_same_v<T, RGSubtracted>) {
          Eigen::MatrixXd phi(1, 1);
          phi(0, 0) = phi_rg_subtracted(sys.curves[0], sch.inv_lambda_R, sch.mu,
                                        energy, cfg);
          return phi;
        } else {
          return phi_regularized(sys, sch, energy, cfg);
        }
      },
      sys.scheme);
}

Eigen::MatrixXd PrincipalMatrix::matrix(double energy) const {
  return assemble_phi(sys_, energy, cfg_);
}

Eigen::MatrixXd PrincipalMatrix::derivative(double energy) const {
  return phi_derivative(sys_, energy, cfg_);
}

std::vector<EntryReport> PrincipalMatrix::quadrature_report(double energy) const {
  const int n = static_cast<int>(sys_.size());
  bool eps_coarse = false;
  if (const auto* reg = std::get_if<Regularized>(&sys_.scheme)) {
    for (const auto& c : sys_.curves)
      if (reg->eps > 0.1 * c.length() * c.length()) eps_coarse = true;
  }
  Eigen::MatrixXd coarse = assemble_phi(sys_, energy, cfg_);
  QuadratureConfig fine = cfg_;
  fine.panel_order = std::min(fine.panel_order + 8, 32);
  fine.panel_min_rel = cfg_.panel_min_rel * 0.1;
  Eigen::MatrixXd finer = assemble_phi(sys_, energy, fine);
  std::vector<EntryReport> reports;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      EntryReport r;
      r.i = i;
      r.j = j;
      long nodes_i = static_cast<long>(sys_.curves[i].nodes().size());
      long nodes_j = static_cast<long>(sys_.curves[j].nodes().size());
      r.kernel_evals = i == j ? nodes_i * 64L * cfg_.panel_order : nodes_i * nodes_j;
      r.estimated_error = std::abs(coarse(i, j) - finer(i, j));
      if (i != j) {
        double spacing = std::max(sys_.curves[i].length() / nodes_i,
                                  sys_.curves[j].length() / nodes_j);
        r.resolution_warning = sys_.distances(i, j) < 2.0 * spacing;
      } else {
        // cutoff larger than the squared length scale: not in the
        // asymptotic regularization regime
        r.resolution_warning = eps_coarse;
      }
      reports.push_back(r);
    }
  return reports;
}

}  // namespace curvebound
