#include "curvebound/curve_system.hpp"

#include <cmath>

namespace curvebound {

Eigen::MatrixXd pairwise_distances(const Manifold& m,
                                   const std::vector<Curve>& curves) {
  const int n = static_cast<int>(curves.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& pi = curves[i].node_points();
      const auto& pj = curves[j].node_points();
      double best = 1e300;
      std::size_t bi = 0, bj = 0;
      for (std::size_t a = 0; a < pi.size(); ++a)
        for (std::size_t b = 0; b < pj.size(); ++b) {
          double dd = geodesic_distance(m, pi[a], pj[b]);
          if (dd < best) {
            best = dd;
            bi = a;
            bj = b;
          }
        }
      // local refinement around the minimizing node pair; descends to the
      // crossing point when the curves actually intersect
      double si = curves[i].nodes()[bi], sj = curves[j].nodes()[bj];
      double hi = curves[i].length() / pi.size(), hj = curves[j].length() / pj.size();
      for (int round = 0; round < 24; ++round) {
        double s0 = si, s1 = sj;
        for (int a = -2; a <= 2; ++a)
          for (int b = -2; b <= 2; ++b) {
            double sa = s0 + a * hi / 2.0, sb = s1 + b * hj / 2.0;
            double dd = geodesic_distance(m, curves[i].eval(sa), curves[j].eval(sb));
            if (dd < best) {
              best = dd;
              si = sa;
              sj = sb;
            }
          }
        hi *= 0.5;
        hj *= 0.5;
      }
      if (!(best > 1e-6 * std::max(curves[i].length(), curves[j].length())))
        throw GeometryError("curves intersect at node resolution");
      d(i, j) = d(j, i) = best;
    }
  }
  return d;
}

CurveSystem make_curve_system(const Manifold& m, std::vector<Curve> curves,
                              Scheme scheme) {
  if (curves.empty()) throw ScenarioError("curve system requires at least one curve");
  validate_scheme(m, curves.size(), scheme);
  CurveSystem sys;
  sys.manifold = m;
  sys.distances = pairwise_distances(m, curves);
  sys.curves = std::move(curves);
  sys.scheme = std::move(scheme);
  return sys;
}

}  // namespace curvebound
