#include "curvebound/scenario.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "curvebound/principal_operator.hpp"

namespace curvebound {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key))
    throw ScenarioError(ctx + ": missing field '" + key + "'");
  return j.at(key);
}

double need_num(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number())
    throw ScenarioError(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

double opt_num(const json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ScenarioError(std::string("field '") + key + "': expected a number");
  return j.at(key).get<double>();
}

int opt_int(const json& j, const char* key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<int>();
}

std::string need_str(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_string())
    throw ScenarioError(ctx + "." + key + ": expected a string");
  return v.get<std::string>();
}

Eigen::Vector3d parse_vec3(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3)
    throw ScenarioError(ctx + ": expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Vector2d parse_vec2(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2)
    throw ScenarioError(ctx + ": expected an array of 2 numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

Manifold parse_manifold(const json& j) {
  std::string kind = need_str(j, "kind", "manifold");
  Manifold m;
  if (kind == "plane") {
    m = Manifold::plane();
  } else if (kind == "euclidean3") {
    m = Manifold::euclidean3();
  } else if (kind == "torus3") {
    const json& p = need(j, "periods", "manifold");
    Eigen::Vector3d v = parse_vec3(p, "manifold.periods");
    m = Manifold::torus3(v[0], v[1], v[2]);
  } else if (kind == "hyperbolic3") {
    m = Manifold::hyperbolic3(need_num(j, "curvature_scale", "manifold"));
  } else {
    throw ScenarioError("manifold.kind: unknown backend '" + kind + "'");
  }
  m.image_rel_tol = opt_num(j, "image_rel_tol", m.image_rel_tol);
  m.max_shells = opt_int(j, "max_shells", m.max_shells);
  m.time_rel_tol = opt_num(j, "time_rel_tol", m.time_rel_tol);
  return m;
}

CurveSpec parse_curve(const json& j, const std::string& ctx) {
  std::string type = need_str(j, "type", ctx);
  if (type == "circle3") {
    Circle3Spec s;
    s.radius = need_num(j, "radius", ctx);
    if (j.contains("center")) s.center = parse_vec3(j.at("center"), ctx + ".center");
    if (j.contains("normal")) s.normal = parse_vec3(j.at("normal"), ctx + ".normal");
    return s;
  }
  if (type == "ellipse3") {
    Ellipse3Spec s;
    s.a = need_num(j, "a", ctx);
    s.b = need_num(j, "b", ctx);
    if (j.contains("center")) s.center = parse_vec3(j.at("center"), ctx + ".center");
    if (j.contains("normal")) s.normal = parse_vec3(j.at("normal"), ctx + ".normal");
    return s;
  }
  if (type == "torus_knot") {
    TorusKnotSpec s;
    s.p = opt_int(j, "p", 2);
    s.q = opt_int(j, "q", 3);
    s.major = need_num(j, "major", ctx);
    s.minor = need_num(j, "minor", ctx);
    if (j.contains("center")) s.center = parse_vec3(j.at("center"), ctx + ".center");
    return s;
  }
  if (type == "circle2") {
    Circle2Spec s;
    s.radius = need_num(j, "radius", ctx);
    if (j.contains("center")) s.center = parse_vec2(j.at("center"), ctx + ".center");
    return s;
  }
  if (type == "circle_h3") {
    CircleH3Spec s;
    s.radius = need_num(j, "radius", ctx);
    if (j.contains("center")) s.center = parse_vec3(j.at("center"), ctx + ".center");
    return s;
  }
  if (type == "sampled") {
    if (j.contains("path")) return read_sampled_points(j.at("path").get<std::string>());
    SampledSpec s;
    const json& pts = need(j, "points", ctx);
    if (!pts.is_array()) throw ScenarioError(ctx + ".points: expected an array");
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() < 2)
        throw ScenarioError(ctx + ".points: expected arrays of coordinates");
      double x = p[0].get<double>(), y = p[1].get<double>();
      double z = p.size() > 2 ? p[2].get<double>() : 0.0;
      s.points.emplace_back(x, y, z);
    }
    return s;
  }
  throw ScenarioError(ctx + ".type: unknown curve type '" + type + "'");
}

Scheme parse_scheme(const json& scheme_j, const json& curves_j) {
  std::string type = need_str(scheme_j, "type", "scheme");
  if (type == "bound_state") {
    BoundState3D s;
    for (std::size_t i = 0; i < curves_j.size(); ++i)
      s.nu.push_back(need_num(curves_j[i], "nu", "curves[" + std::to_string(i) + "]"));
    return s;
  }
  if (type == "finite2d") {
    Finite2D s;
    for (std::size_t i = 0; i < curves_j.size(); ++i)
      s.lambda.push_back(
          need_num(curves_j[i], "lambda", "curves[" + std::to_string(i) + "]"));
    return s;
  }
  if (type == "rg_subtracted" || type == "regularized") {
    double mu = need_num(scheme_j, "mu", "scheme");
    double inv_lambda;
    if (scheme_j.contains("inv_lambda_R"))
      inv_lambda = scheme_j.at("inv_lambda_R").get<double>();
    else if (scheme_j.contains("lambda_R"))
      inv_lambda = 1.0 / scheme_j.at("lambda_R").get<double>();
    else
      throw ScenarioError("scheme: provide lambda_R or inv_lambda_R");
    if (type == "rg_subtracted") {
      RGSubtracted s;
      s.mu = mu;
      s.inv_lambda_R = inv_lambda;
      return s;
    }
    Regularized s;
    s.mu = mu;
    s.inv_lambda_R = inv_lambda;
    s.eps = need_num(scheme_j, "eps", "scheme");
    return s;
  }
  throw ScenarioError("scheme.type: unknown scheme '" + type + "'");
}

}  // namespace

QuadratureConfig Scenario::quadrature() const {
  QuadratureConfig cfg;
  cfg.threads = solver.threads;
  return cfg;
}

namespace {
Scenario parse_scenario_json_impl(const json& j);
}

Scenario parse_scenario_json(const json& j) {
  try {
    return parse_scenario_json_impl(j);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario field error: ") + e.what());
  }
}

namespace {
Scenario parse_scenario_json_impl(const json& j) {
  if (!j.is_object()) throw ScenarioError("scenario: expected a JSON object");
  Scenario sc;
  sc.raw = j;
  sc.hash = fnv1a_hex(j.dump());

  if (j.contains("units")) {
    sc.units.hbar = opt_num(j.at("units"), "hbar", 1.0);
    sc.units.mass = opt_num(j.at("units"), "mass", 0.5);
  }
  sc.units.validate();

  sc.manifold = parse_manifold(need(j, "manifold", "scenario"));

  const json& curves_j = need(j, "curves", "scenario");
  if (!curves_j.is_array() || curves_j.empty())
    throw ScenarioError("curves: expected a non-empty array");
  for (std::size_t i = 0; i < curves_j.size(); ++i)
    sc.specs.push_back(parse_curve(curves_j[i], "curves[" + std::to_string(i) + "]"));

  sc.scheme = parse_scheme(need(j, "scheme", "scenario"), curves_j);
  validate_scheme(sc.manifold, sc.specs.size(), sc.scheme);

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    sc.solver.nodes = opt_int(s, "nodes", sc.solver.nodes);
    sc.solver.e_min = opt_num(s, "e_min", sc.solver.e_min);
    sc.solver.tol = opt_num(s, "tol", sc.solver.tol);
    sc.solver.threads = opt_int(s, "threads", sc.solver.threads);
    if (s.contains("grid")) {
      const json& g = s.at("grid");
      sc.solver.grid.from = need_num(g, "from", "solver.grid");
      sc.solver.grid.to = need_num(g, "to", "solver.grid");
      sc.solver.grid.count = opt_int(g, "count", sc.solver.grid.count);
      if (sc.solver.grid.count < 2 || !(sc.solver.grid.from < sc.solver.grid.to))
        throw ScenarioError("solver.grid: need from < to and count >= 2");
    }
    if (s.contains("wavefunction_grid")) {
      const json& w = s.at("wavefunction_grid");
      if (w.contains("lo") && w.contains("hi")) {
        sc.solver.wgrid.automatic = false;
        sc.solver.wgrid.lo = parse_vec3(w.at("lo"), "solver.wavefunction_grid.lo");
        sc.solver.wgrid.hi = parse_vec3(w.at("hi"), "solver.wavefunction_grid.hi");
      }
      sc.solver.wgrid.margin = opt_num(w, "margin", sc.solver.wgrid.margin);
      if (w.contains("n")) {
        const json& n = w.at("n");
        if (n.is_number()) {
          sc.solver.wgrid.n[0] = sc.solver.wgrid.n[1] = sc.solver.wgrid.n[2] =
              n.get<int>();
        } else if (n.is_array() && n.size() == 3) {
          for (int k = 0; k < 3; ++k) sc.solver.wgrid.n[k] = n[k].get<int>();
        } else {
          throw ScenarioError("solver.wavefunction_grid.n: number or array of 3");
        }
      }
    }
    if (s.contains("taus")) {
      sc.solver.taus.clear();
      for (const auto& t : s.at("taus")) sc.solver.taus.push_back(t.get<double>());
    }
    sc.solver.rg_energy = opt_num(s, "rg_energy", sc.solver.rg_energy);
    if (!(sc.solver.tol > 0.0)) throw ScenarioError("solver.tol must be positive");
  }

  if (j.contains("outputs"))
    sc.out_dir = j.at("outputs").value("dir", sc.out_dir);
  return sc;
}
}  // namespace

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  return parse_scenario_json(j);
}

CurveSystem realize(const Scenario& sc) {
  std::vector<Curve> curves;
  curves.reserve(sc.specs.size());
  for (const auto& spec : sc.specs)
    curves.push_back(build_curve(spec, sc.manifold, sc.solver.nodes));
  return make_curve_system(sc.manifold, std::move(curves), sc.scheme);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ScenarioError("cannot write output file: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, p);
}

}  // namespace curvebound
