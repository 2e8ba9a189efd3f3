#include "curvebound/runner.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "curvebound/rg_flow.hpp"
#include "curvebound/spectral.hpp"

namespace curvebound {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double lap_ms() {
    auto now = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(now - mark_).count();
    mark_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

json system_block(const Scenario& sc, const CurveSystem& sys) {
  json block;
  json lengths = json::array(), kmax = json::array(), gaps = json::array();
  for (const auto& c : sys.curves) {
    lengths.push_back(c.length());
    kmax.push_back(c.frenet().curvature_max);
    gaps.push_back({{"delta", c.self_gap().delta},
                    {"min_distance_beyond", c.self_gap().min_beyond},
                    {"shrink", c.self_gap().shrink}});
  }
  block["manifold"] = sys.manifold.name();
  block["lengths"] = lengths;
  block["curvature_max"] = kmax;
  block["self_gaps"] = gaps;
  json dist = json::array();
  for (Eigen::Index i = 0; i < sys.distances.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < sys.distances.cols(); ++j)
      row.push_back(sys.distances(i, j));
    dist.push_back(row);
  }
  block["distances"] = dist;
  block["scheme"] = scheme_name(sys.scheme);
  block["units"] = {{"hbar", sc.units.hbar}, {"mass", sc.units.mass}};
  return block;
}

json solution_block(const Scenario& sc, const SpectralSolution& sol) {
  json s;
  s["e_ground"] = sol.e_ground;
  s["e_ground_physical"] = sc.units.from_canonical_energy(sol.e_ground);
  json a0 = json::array();
  for (Eigen::Index i = 0; i < sol.ground_vector.size(); ++i)
    a0.push_back(sol.ground_vector[i]);
  s["ground_vector"] = a0;
  s["omega_slope"] = sol.omega_slope;
  s["normalization"] = sol.normalization;
  s["bracket"] = {sol.bracket.first, sol.bracket.second};
  s["residual"] = sol.residual;
  return s;
}

std::vector<Point> box_grid(const Point& lo, const Point& hi, const int n[3]) {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  for (int a = 0; a < n[0]; ++a)
    for (int b = 0; b < n[1]; ++b)
      for (int c = 0; c < n[2]; ++c) {
        Point p;
        p[0] = n[0] > 1 ? lo[0] + (hi[0] - lo[0]) * a / (n[0] - 1) : lo[0];
        p[1] = n[1] > 1 ? lo[1] + (hi[1] - lo[1]) * b / (n[1] - 1) : lo[1];
        p[2] = n[2] > 1 ? lo[2] + (hi[2] - lo[2]) * c / (n[2] - 1) : lo[2];
        pts.push_back(p);
      }
  return pts;
}

json scheme_warnings(const CurveSystem& sys) {
  json warnings = json::array();
  if (const auto* reg = std::get_if<Regularized>(&sys.scheme)) {
    for (std::size_t i = 0; i < sys.size(); ++i)
      if (reg->eps > 0.1 * sys.curves[i].length() * sys.curves[i].length())
        warnings.push_back("curve " + std::to_string(i) +
                           ": cutoff exceeds 0.1 L^2; regularization regime not asymptotic");
  }
  return warnings;
}

void auto_box(const CurveSystem& sys, double margin, Point* lo, Point* hi) {
  Point mn = sys.curves[0].node_points()[0], mx = mn;
  for (const auto& c : sys.curves)
    for (const auto& p : c.node_points()) {
      mn = mn.cwiseMin(p);
      mx = mx.cwiseMax(p);
    }
  Eigen::Vector3d pad = margin * (mx - mn) + Eigen::Vector3d::Constant(0.5);
  *lo = mn - pad;
  *hi = mx + pad;
  if (sys.manifold.kind == ManifoldKind::HyperbolicSpace3)
    (*lo)[2] = std::max((*lo)[2], 1e-3 * (*hi)[2]);  // stay inside the chart
}

}  // namespace

json run_solve(const Scenario& sc) {
  Stopwatch watch;
  CurveSystem sys = realize(sc);
  double t_build = watch.lap_ms();
  PrincipalMatrix phi(sys, sc.quadrature());
  SpectralSolution sol =
      solve_ground_state(phi, sc.units.to_canonical_energy(sc.solver.e_min));
  double t_solve = watch.lap_ms();
  PositivityReport pos = positivity_check(sol, phi);

  json rec;
  rec["artifact"] = {{"name", "curvebound"}, {"version", kVersion}};
  rec["command"] = "solve";
  rec["scenario_hash"] = sc.hash;
  rec["system"] = system_block(sc, sys);
  rec["solution"] = solution_block(sc, sol);
  rec["positivity"] = {{"offdiag_negative", pos.offdiag_negative},
                       {"components_positive", pos.components_positive},
                       {"min_component", pos.min_component},
                       {"spectral_gap", pos.spectral_gap},
                       {"ground_simple", pos.ground_simple},
                       {"passed", pos.passed}};
  double t_cert = 0.0;
  if (sys.size() >= 2 && std::holds_alternative<BoundState3D>(sys.scheme)) {
    GershgorinBound gb =
        gershgorin_lower_bound(phi, sc.units.to_canonical_energy(sc.solver.e_min));
    t_cert = watch.lap_ms();
    json cert = json::array();
    for (const auto& row : gb.certificate)
      cert.push_back({{"energy", row.energy}, {"margin", row.margin}});
    bool ordering = gb.e_star <= sol.e_ground + 1e-9 * std::abs(sol.e_ground) &&
                    sol.e_ground <= phi.energy_ceiling() + 1e-12;
    rec["gershgorin"] = {{"e_star", gb.e_star},
                         {"e_star_physical", sc.units.from_canonical_energy(gb.e_star)},
                         {"certificate", cert},
                         {"ordering_ok", ordering}};
  }
  rec["timings_ms"] = {{"build", t_build}, {"solve", t_solve}, {"certificates", t_cert}};
  json warnings = scheme_warnings(sys);
  if (!warnings.empty()) rec["warnings"] = warnings;
  return rec;
}

json run_scan(const Scenario& sc, std::string* csv) {
  CurveSystem sys = realize(sc);
  PrincipalMatrix phi(sys, sc.quadrature());
  const int n = static_cast<int>(sys.size());

  std::vector<double> grid(sc.solver.grid.count);
  double from = sc.units.to_canonical_energy(sc.solver.grid.from);
  double to = sc.units.to_canonical_energy(sc.solver.grid.to);
  for (int k = 0; k < sc.solver.grid.count; ++k)
    grid[k] = from + (to - from) * k / (sc.solver.grid.count - 1);
  if (!(grid.back() < 0.0))
    throw ScenarioError("solver.grid: scan energies must stay below zero");

  EigenFlow flow = eigen_flow(phi, grid);

  std::ostringstream out;
  out << "E";
  for (int k = 0; k < n; ++k) out << ",omega_" << k;
  for (int k = 0; k < n; ++k) out << ",slope_" << k;
  out << "\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out << format_double(grid[g]);
    for (int k = 0; k < n; ++k) out << "," << format_double(flow.eigenvalues(g, k));
    for (int k = 0; k < n; ++k) out << "," << format_double(flow.slopes(g, k));
    out << "\n";
  }
  if (csv) *csv = out.str();

  json crossings = json::array();
  for (int k = 0; k < n; ++k)
    for (std::size_t g = 0; g + 1 < grid.size(); ++g)
      if (flow.eigenvalues(g, k) > 0.0 && flow.eigenvalues(g + 1, k) <= 0.0)
        crossings.push_back(
            {{"branch", k}, {"e_lo", grid[g]}, {"e_hi", grid[g + 1]}});

  bool monotone = true;
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (int k = 0; k < n; ++k)
      if (!(flow.slopes(g, k) < 0.0)) monotone = false;

  json rec;
  rec["artifact"] = {{"name", "curvebound"}, {"version", kVersion}};
  rec["command"] = "scan";
  rec["scenario_hash"] = sc.hash;
  rec["grid"] = {{"from", from}, {"to", to}, {"count", sc.solver.grid.count}};
  rec["zero_crossings"] = crossings;
  rec["all_slopes_negative"] = monotone;
  rec["flagged_crossings"] = flow.flagged_crossings;
  json warnings = scheme_warnings(sys);
  if (!warnings.empty()) rec["warnings"] = warnings;
  return rec;
}

json run_wavefunction(const Scenario& sc, std::string* csv) {
  CurveSystem sys = realize(sc);
  PrincipalMatrix phi(sys, sc.quadrature());
  SpectralSolution sol =
      solve_ground_state(phi, sc.units.to_canonical_energy(sc.solver.e_min));

  WavefunctionGrid wg = sc.solver.wgrid;
  Point lo = wg.lo, hi = wg.hi;
  if (wg.automatic) auto_box(sys, wg.margin, &lo, &hi);
  int n[3] = {wg.n[0], wg.n[1], wg.n[2]};
  if (sys.manifold.dimension() == 2) {
    lo[2] = hi[2] = 0.0;
    n[2] = 1;
  }
  std::vector<Point> pts = box_grid(lo, hi, n);
  std::vector<std::uint8_t> flags;
  std::vector<double> psi =
      ground_state_wavefunction(sol, sys, pts, sc.quadrature(), &flags);

  std::ostringstream out;
  out << "x,y,z,psi,near_support\n";
  double min_psi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out << format_double(pts[i][0]) << "," << format_double(pts[i][1]) << ","
        << format_double(pts[i][2]) << "," << format_double(psi[i]) << ","
        << int(flags[i]) << "\n";
    if (!flags[i]) min_psi = std::min(min_psi, psi[i]);
  }
  if (csv) *csv = out.str();

  json rec;
  rec["artifact"] = {{"name", "curvebound"}, {"version", kVersion}};
  rec["command"] = "wavefunction";
  rec["scenario_hash"] = sc.hash;
  rec["solution"] = solution_block(sc, sol);
  rec["grid"] = {{"lo", {lo[0], lo[1], lo[2]}},
                 {"hi", {hi[0], hi[1], hi[2]}},
                 {"n", {n[0], n[1], n[2]}}};
  rec["min_psi"] = min_psi;
  rec["all_positive"] = min_psi > 0.0;
  return rec;
}

json run_rgflow(const Scenario& sc, std::string* csv) {
  const auto* rg = std::get_if<RGSubtracted>(&sc.scheme);
  if (!rg)
    throw SchemeError("the flow command requires the subtracted scheme");
  Curve curve = build_curve(sc.specs[0], sc.manifold, sc.solver.nodes);
  FlowConstant fc = flow_constant(curve);
  double col = fc.value / curve.length();

  std::ostringstream out;
  out << "tau,inv_lambda,lambda\n";
  for (double tau : sc.solver.taus) {
    double inv = flow_inv_coupling(rg->inv_lambda_R, col, tau);
    double lam = inv != 0.0 ? 1.0 / inv : std::numeric_limits<double>::infinity();
    out << format_double(tau) << "," << format_double(inv) << ","
        << format_double(lam) << "\n";
  }
  if (csv) *csv = out.str();

  json rec;
  rec["artifact"] = {{"name", "curvebound"}, {"version", kVersion}};
  rec["command"] = "rgflow";
  rec["scenario_hash"] = sc.hash;
  rec["flow_constant"] = {{"value", fc.value},
                          {"quad_error", fc.quad_error},
                          {"per_length", col}};
  if (rg->inv_lambda_R != 0.0) {
    double lam = 1.0 / rg->inv_lambda_R;
    rec["beta"] = beta_function(curve, lam);
    RGState state{lam, rg->mu, curve.length(), fc.value};
    double tau_ref = 10.0;
    rec["flow_closed_vs_ode"] = std::abs(flow_coupling(state, tau_ref) -
                                         flow_coupling_ode(state, tau_ref));
  }

  double e_can = sc.units.to_canonical_energy(sc.solver.rg_energy);
  json laws = json::array();
  for (double tau : sc.solver.taus) {
    ScalingLawReport rep =
        scaling_law_check(sc.specs[0], sc.manifold, sc.solver.nodes,
                          rg->inv_lambda_R, rg->mu, e_can, tau, sc.quadrature());
    laws.push_back({{"tau", rep.tau},
                    {"energy", rep.energy},
                    {"lhs", rep.lhs},
                    {"rhs", rep.rhs},
                    {"discrepancy", rep.discrepancy}});
  }
  rec["scaling_law"] = laws;

  // scale invariance: evaluate at mu and 1.01 mu with the coupling flowed
  double e_probe = e_can;
  QuadratureConfig cfg = sc.quadrature();
  double phi_mu = phi_rg_subtracted(curve, rg->inv_lambda_R, rg->mu, e_probe, cfg);
  double inv_flowed = flow_inv_coupling(rg->inv_lambda_R, col, 1.01);
  double phi_mu2 =
      phi_rg_subtracted(curve, inv_flowed, 1.01 * rg->mu, e_probe, cfg);
  rec["mu_invariance_residual"] = std::abs(phi_mu - phi_mu2);
  return rec;
}

json quadrature_debug(const Scenario& sc, double energy_physical) {
  CurveSystem sys = realize(sc);
  PrincipalMatrix phi(sys, sc.quadrature());
  double e = sc.units.to_canonical_energy(energy_physical);
  json entries = json::array();
  for (const auto& r : phi.quadrature_report(e))
    entries.push_back({{"i", r.i},
                       {"j", r.j},
                       {"kernel_evals", r.kernel_evals},
                       {"estimated_error", r.estimated_error},
                       {"resolution_warning", r.resolution_warning}});
  return {{"energy", e}, {"entries", entries}};
}

int run_check(const Scenario& sc, std::uint64_t seed, std::ostream& log) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    log << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) log << "  (" << detail << ")";
    log << "\n";
    if (!ok) ++failures;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CurveSystem sys;
  try {
    sys = realize(sc);
    check("system.build", true);
  } catch (const std::exception& e) {
    check("system.build", false, e.what());
    throw;  // nothing else can run
  }
  const Manifold& m = sys.manifold;
  PrincipalMatrix phi(sys, sc.quadrature());

  // geometry: heat kernel symmetry and positivity at random pairs
  {
    bool ok = true;
    std::string why;
    for (int k = 0; k < 20 && ok; ++k) {
      const Curve& c = sys.curves[k % sys.size()];
      Point x = c.eval(unit(rng) * c.length());
      Point y = sys.curves[0].eval(unit(rng) * sys.curves[0].length());
      double t = 0.05 + 2.0 * unit(rng);
      double kxy = heat_kernel(m, t, x, y), kyx = heat_kernel(m, t, y, x);
      if (!(kxy > 0.0) || std::abs(kxy - kyx) > 1e-12 * std::abs(kxy)) {
        ok = false;
        why = "t=" + format_double(t);
      }
    }
    check("geometry.heat_kernel_symmetric_positive", ok, why);
  }
  if (m.flat() && m.kind != ManifoldKind::FlatTorus3) {
    bool ok = true;
    int d = m.dimension();
    for (double tau : {0.5, 2.0, 10.0}) {
      Point x(0.3, -0.2, d == 3 ? 0.7 : 0.0), y(-0.5, 0.4, d == 3 ? 0.1 : 0.0);
      double lhs = heat_kernel(m, 0.7, x, y);
      double rhs = std::pow(tau, d) *
                   heat_kernel(m, tau * tau * 0.7, Point(tau * x), Point(tau * y));
      if (std::abs(lhs - rhs) > 1e-11 * std::abs(lhs)) ok = false;
    }
    check("geometry.heat_kernel_scaling", ok);
  }

  // curves: unit speed, periodicity, sandwich, frames
  {
    bool speed_ok = true, periodic_ok = true, sandwich_ok = true, frame_ok = true;
    for (const auto& c : sys.curves) {
      double L = c.length();
      for (int k = 0; k < 50; ++k) {
        double s = unit(rng) * L;
        double h = 1e-4;
        double ratio = geodesic_distance(m, c.eval(s), c.eval(s + h)) / h;
        if (std::abs(ratio - 1.0) > 1e-3) speed_ok = false;
      }
      if (geodesic_distance(m, c.eval(0.3 * L), c.eval(0.3 * L + L)) > 1e-9 * L)
        periodic_ok = false;
      const auto& gap = c.self_gap();
      for (int k = 0; k < 200; ++k) {
        double s = unit(rng) * L;
        double xi = unit(rng) * gap.delta;
        if (xi < 1e-12) continue;
        double d = geodesic_distance(m, c.eval(s), c.eval(s + xi));
        if (d > xi * (1.0 + 1e-7) + 1e-12) sandwich_ok = false;
        if (d < gap.shrink * xi * (1.0 - 1e-7) - 1e-12) sandwich_ok = false;
      }
      for (std::size_t k = 0; k < c.nodes().size(); k += 7) {
        const auto& f = c.frenet().frames[k];
        const Point& x = c.node_points()[k];
        double nt = metric_norm(m, x, f.tangent);
        double nn = metric_norm(m, x, f.normal);
        double w = metric_norm(m, x, Eigen::Vector3d::UnitX());
        double dot_tn = w * w * f.tangent.dot(f.normal);
        if (std::abs(nt - 1.0) > 1e-6 || std::abs(nn - 1.0) > 1e-5 ||
            std::abs(dot_tn) > 1e-5)
          frame_ok = false;
      }
    }
    check("curves.unit_speed", speed_ok);
    check("curves.periodic", periodic_ok);
    check("curves.distance_sandwich", sandwich_ok);
    check("curves.frenet_frames", frame_ok);
  }

  // operator: symmetry, derivative sign, finite differences, monotonicity
  {
    double ceiling = phi.energy_ceiling();
    double e1 = ceiling != 0.0 ? 1.8 * ceiling : -2.0;
    double e2 = ceiling != 0.0 ? 3.0 * ceiling : -4.0;
    Eigen::MatrixXd m1 = phi.matrix(e1), m2 = phi.matrix(e2);
    check("operator.symmetry",
          (m1 - m1.transpose()).cwiseAbs().maxCoeff() < 1e-12 &&
              (m2 - m2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::MatrixXd d1 = phi.derivative(e1);
    check("operator.derivative_negative", (d1.array() < 0.0).all());
    double h = 1e-5 * std::abs(e1);
    Eigen::MatrixXd fd = (phi.matrix(e1 + h) - phi.matrix(e1 - h)) / (2.0 * h);
    double rel = (fd - d1).cwiseAbs().maxCoeff() / d1.cwiseAbs().maxCoeff();
    check("operator.derivative_matches_fd", rel < 1e-6, "rel=" + format_double(rel));
    bool mono = true;
    for (int i = 0; i < m1.rows(); ++i)
      if (!(m2(i, i) > m1(i, i))) mono = false;
    check("operator.diagonal_monotone", mono);
  }

  // spectral layer
  if (std::holds_alternative<BoundState3D>(sys.scheme) ||
      std::holds_alternative<Finite2D>(sys.scheme)) {
    SpectralSolution sol =
        solve_ground_state(phi, sc.units.to_canonical_energy(sc.solver.e_min));
    check("spectral.residual", sol.residual <= 1e-8);
    bool pos_ok = true;
    std::string why;
    try {
      positivity_check(sol, phi);
    } catch (const std::exception& e) {
      pos_ok = false;
      why = e.what();
    }
    check("spectral.positivity", pos_ok, why);
    if (sys.size() >= 2 && std::holds_alternative<BoundState3D>(sys.scheme)) {
      GershgorinBound gb =
          gershgorin_lower_bound(phi, sc.units.to_canonical_energy(sc.solver.e_min));
      bool order = gb.e_star <= sol.e_ground + 1e-9 * std::abs(sol.e_ground) &&
                   sol.e_ground <= phi.energy_ceiling() + 1e-12;
      check("spectral.ordering_chain", order);
      bool disks = true;
      for (int k = 0; k < 20; ++k) {
        double e = gb.e_star - 4.0 * unit(rng) - 1e-6;
        Eigen::MatrixXd mm = phi.matrix(e);
        for (int i = 0; i < mm.rows(); ++i) {
          double radius = 0.0;
          for (int j = 0; j < mm.cols(); ++j)
            if (j != i) radius += std::abs(mm(i, j));
          if (!(mm(i, i) - radius >= -1e-10)) disks = false;
        }
      }
      check("spectral.disk_certificate", disks);
    }
    // analytic slope vs centered differences at a probe energy
    {
      double e = sol.e_ground * 1.5;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(phi.matrix(e));
      Eigen::VectorXd a = es.eigenvectors().col(0);
      double slope = a.dot(phi.derivative(e) * a);
      double h = 1e-4 * std::abs(e);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(phi.matrix(e + h));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> en(phi.matrix(e - h));
      double fd = (ep.eigenvalues()[0] - en.eigenvalues()[0]) / (2.0 * h);
      check("spectral.slope_matches_fd",
            std::abs(fd - slope) <= 1e-5 * std::abs(slope),
            "rel=" + format_double(std::abs(fd - slope) / std::abs(slope)));
    }
  }

  if (const auto* rg = std::get_if<RGSubtracted>(&sys.scheme)) {
    ScalingLawReport rep =
        scaling_law_check(sc.specs[0], m, sc.solver.nodes, rg->inv_lambda_R,
                          rg->mu, -1.0, 2.0, sc.quadrature());
    check("rg.scaling_law", rep.discrepancy < 1e-6,
          "residual=" + format_double(rep.discrepancy));
    const Curve& c = sys.curves[0];
    FlowConstant fc = flow_constant(c);
    RGState st{1.0, rg->mu, c.length(), fc.value};
    RGState mid{flow_coupling(st, 2.0), 2.0 * rg->mu, c.length(), fc.value};
    double ab = flow_coupling(mid, 3.0);
    double direct = flow_coupling(st, 6.0);
    check("rg.flow_semigroup", std::abs(ab - direct) < 1e-10);
    check("rg.flow_ode_match",
          std::abs(flow_coupling(st, 10.0) - flow_coupling_ode(st, 10.0)) < 1e-8);
    check("rg.asymptotic_freedom", beta_function(c, 1.0) < 0.0);
  }

  return failures;
}

}  // namespace curvebound
