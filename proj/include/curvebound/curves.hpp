#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "curvebound/geometry.hpp"

namespace curvebound {

struct Circle3Spec {
  double radius = 1.0;
  Point center{0, 0, 0};
  Eigen::Vector3d normal{0, 0, 1};
};
struct Ellipse3Spec {
  double a = 2.0, b = 1.0;
  Point center{0, 0, 0};
  Eigen::Vector3d normal{0, 0, 1};
};
struct TorusKnotSpec {
  int p = 2, q = 3;
  double major = 2.0, minor = 0.5;
  Point center{0, 0, 0};
};
struct Circle2Spec {
  double radius = 1.0;
  Eigen::Vector2d center{0, 0};
};
struct CircleH3Spec {
  double radius = 1.0;
  Point center{0, 0, 1};  // upper half-space chart, z > 0
};
struct SampledSpec {
  std::vector<Point> points;  // ordered, implicitly closed
};

using CurveSpec = std::variant<Circle3Spec, Ellipse3Spec, TorusKnotSpec,
                               Circle2Spec, CircleH3Spec, SampledSpec>;

// Scale a flat-space spec by a coordinate factor (x -> factor * x).
CurveSpec scale_spec(const CurveSpec& spec, double factor);

struct FrenetFrame {
  Eigen::Vector3d tangent, normal, binormal;
};

struct CurveFrenetData {
  std::vector<double> curvature;  // geodesic curvature kappa_g at the nodes
  std::vector<double> torsion;    // stored for completeness, unused by solvers
  std::vector<FrenetFrame> frames;
  double curvature_max = 0.0;
  double accuracy = 0.0;  // estimated error of the curvature values
};

struct SelfGapCertificate {
  double delta = 0.0;       // arc radius of the near regime
  double min_beyond = 0.0;  // lower bound on d_g when arc separation > delta
  double shrink = 1.0;      // sqrt(1 - kappa_max * delta)
};

// Closed curve with unit-speed parametrization.  Immutable after build;
// evaluation is pure and safe to call concurrently.
class Curve {
 public:
  double length() const { return length_; }
  const Manifold& manifold() const { return manifold_; }

  Point eval(double s) const;                   // periodic in s
  Eigen::Vector3d unit_tangent(double s) const; // chart components of dgamma/ds

  // Arclength quadrature grid s_i = i L / n and the cached points.
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<Point>& node_points() const { return node_points_; }

  const CurveFrenetData& frenet() const { return frenet_; }
  const SelfGapCertificate& self_gap() const { return self_gap_; }
  double parametrization_error() const { return param_error_; }

 private:
  friend Curve build_curve(const CurveSpec&, const Manifold&, int);
  Manifold manifold_;
  double length_ = 0.0;
  double param_error_ = 0.0;
  std::function<Point(double)> eval_;             // by arclength
  std::function<Eigen::Vector3d(double)> tangent_;
  std::vector<double> nodes_;
  std::vector<Point> node_points_;
  CurveFrenetData frenet_;
  SelfGapCertificate self_gap_;
};

// Build a curve from its spec: arclength reparametrization, Frenet data,
// self-distance certificate, and validity checks.  nodes >= 32.
Curve build_curve(const CurveSpec& spec, const Manifold& m, int nodes);

// Largest certified delta <= min(L/4, 0.99/(2 kappa_max)) such that
// sqrt(1 - kappa_max delta) * xi <= d_g for all sampled pairs with arc
// separation xi <= delta, together with the minimal distance beyond.
SelfGapCertificate certify_self_gap(const Curve& c);

// Minimal geodesic distance over pairs with arc separation > delta.
double min_distance_beyond(const Curve& c, double delta);

// Read a sampled spec from a plain-text table (one point per line,
// whitespace-separated coordinates, '#' comments).
SampledSpec read_sampled_points(const std::string& path);

}  // namespace curvebound
