#pragma once

#include <Eigen/Dense>
#include <vector>

#include "curvebound/curves.hpp"
#include "curvebound/scheme.hpp"

namespace curvebound {

// A family of non-intersecting closed curves with the active
// renormalization scheme and pairwise distance certificates.
struct CurveSystem {
  Manifold manifold;
  std::vector<Curve> curves;
  Scheme scheme;
  Eigen::MatrixXd distances;  // min geodesic distance between curve pairs; diag 0

  std::size_t size() const { return curves.size(); }
};

// Symmetric matrix of minimal pairwise geodesic distances (diagonal zero).
// Throws GeometryError if two curves touch at node resolution.
Eigen::MatrixXd pairwise_distances(const Manifold& m,
                                   const std::vector<Curve>& curves);

// Validates scheme/manifold compatibility and non-intersection.
CurveSystem make_curve_system(const Manifold& m, std::vector<Curve> curves,
                              Scheme scheme);

}  // namespace curvebound
