#pragma once

// Load programs and the problem definition consumed by the solver, with a JSON
// reader/writer for the "magfem-problem/1" configuration format.

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "magfem/constitutive.hpp"
#include "magfem/errors.hpp"
#include "magfem/mesh.hpp"

namespace magfem {

enum class ProgramShape { Constant, Ramp, RampHold, Sinusoid };

/// Scalar time program.
///   Constant   value
///   Ramp       value * t / t_ramp
///   RampHold   value * min(t / t_ramp, 1)
///   Sinusoid   (value / 2) [1 - cos(2 pi f t)]
struct Program {
  ProgramShape shape = ProgramShape::Constant;
  double value = 0.0;
  double t_ramp = 1.0;
  double frequency = 1.0;

  double operator()(double t) const {
    switch (shape) {
      case ProgramShape::Constant:
        return value;
      case ProgramShape::Ramp:
        return value * t / t_ramp;
      case ProgramShape::RampHold:
        return value * std::min(t / t_ramp, 1.0);
      case ProgramShape::Sinusoid:
        return 0.5 * value * (1.0 - std::cos(2.0 * std::numbers::pi * frequency * t));
    }
    return 0.0;
  }

  static Program constant(double v) { return {ProgramShape::Constant, v, 1.0, 1.0}; }
  static Program ramp(double v, double t_ramp) { return {ProgramShape::Ramp, v, t_ramp, 1.0}; }
  static Program ramp_hold(double v, double t_ramp) {
    return {ProgramShape::RampHold, v, t_ramp, 1.0};
  }
  static Program sinusoid(double v, double f) { return {ProgramShape::Sinusoid, v, 1.0, f}; }
};

enum class Field { Displacement, Potential };

struct DirichletBC {
  std::string set;  ///< node set
  Field field = Field::Displacement;
  int component = 0;
  Program program = Program::constant(0.0);
};

enum class NeumannKind { Traction, SurfaceCharge };

/// Dead load on a reference face set: traction direction * program(t), or a
/// magnetic surface density program(t).
struct NeumannBC {
  std::string set;
  NeumannKind kind = NeumannKind::Traction;
  Vector3 direction = Vector3::UnitX();
  Program program = Program::constant(0.0);
};

enum class ProbeKind { Displacement, Potential, Pressure, MaxAbsJMinus1, MinJ, Reaction };

struct ProbeSpec {
  std::string name;
  ProbeKind kind = ProbeKind::Displacement;
  Vector3 point = Vector3::Zero();  ///< reference position (field probes)
  int component = 0;
  std::string set;                  ///< node set (reaction probes)
};

struct SolverSettings {
  double tol_rel = 1e-8;
  double tol_abs = 1e-10;
  int max_iter = 25;
  int max_halvings = 6;
  double rho_inf = 0.0;
  int threads = 0;  ///< 0: MAGFEM_THREADS or 1
};

/// Uniform grid of `steps` intervals on [t_start, t_end], or the explicit
/// step end times in `grid` when that is non-empty.
struct TimeSettings {
  double t_start = 0.0;
  double t_end = 1.0;
  int steps = 1;
  std::vector<double> grid;

  double dt() const { return (t_end - t_start) / steps; }
  double time_of(int k) const {
    if (!grid.empty()) return grid[k - 1];
    return k == steps ? t_end : t_start + (t_end - t_start) * k / steps;
  }

  void set_grid(double start, std::vector<double> ends) {
    t_start = start;
    grid = std::move(ends);
    steps = static_cast<int>(grid.size());
    t_end = grid.empty() ? start : grid.back();
  }
};

struct Problem {
  std::string name = "problem";
  MixedMesh mesh;
  std::map<int, MaterialSpec> materials;  ///< by region tag
  std::vector<DirichletBC> dirichlet;
  std::vector<NeumannBC> neumann;
  Vector3 field_direction = Vector3::Zero();  ///< applied induction = direction * program(t)
  Program field_program = Program::constant(0.0);
  TimeSettings time;
  SolverSettings solver;
  std::vector<ProbeSpec> probes;

  const MaterialSpec& material(int region) const {
    auto it = materials.find(region);
    if (it == materials.end())
      throw ConfigError("problem: no material for region " + std::to_string(region));
    return it->second;
  }

  bool coupled() const {
    for (const auto& [r, m] : materials)
      if (m.magnetic_mode == MagneticMode::Soft) return true;
    return false;
  }

  Vector3 applied_field(double t) const { return field_direction * field_program(t); }

  void validate() const {
    if (mesh.num_elems() == 0) throw ConfigError("problem: empty mesh");
    for (const auto& [r, m] : materials) m.validate();
    for (int r : mesh.region) material(r);
    if (coupled())
      for (int r : mesh.region)
        if (material(r).magnetic_mode != MagneticMode::Soft)
          throw ConfigError("problem: every region of a coupled problem needs a soft-magnetic "
                            "material (use alpha = beta = eta = 0 for a passive layer)");
    for (const auto& bc : dirichlet) {
      mesh.node_set(bc.set);
      if (bc.field == Field::Displacement && (bc.component < 0 || bc.component > 2))
        throw ConfigError("problem: displacement component out of range");
      if (bc.field == Field::Potential && !coupled())
        throw ConfigError("problem: potential condition on an uncoupled problem");
    }
    for (const auto& bc : neumann) mesh.face_set(bc.set);
    if (time.steps < 1 || !(time.t_end > time.t_start))
      throw ConfigError("problem: time grid must be strictly increasing");
    if (!time.grid.empty()) {
      if (static_cast<int>(time.grid.size()) != time.steps)
        throw ConfigError("problem: time grid size does not match the step count");
      double prev = time.t_start;
      for (double t : time.grid) {
        if (!(t > prev)) throw ConfigError("problem: time grid must be strictly increasing");
        prev = t;
      }
    }
    if (!(solver.tol_rel > 0.0) || !(solver.tol_abs > 0.0) || solver.max_iter < 1)
      throw ConfigError("problem: invalid solver tolerances");
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using nlohmann::json;

inline Vector3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("problem: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json to_json(const Vector3& v) { return json::array({v(0), v(1), v(2)}); }

inline Program program_from_json(const json& j) {
  if (j.is_number()) return Program::constant(j.get<double>());
  const std::string shape = j.value("shape", "constant");
  Program p;
  p.value = j.value("value", 0.0);
  p.t_ramp = j.value("t_ramp", 1.0);
  p.frequency = j.value("frequency", 1.0);
  if (shape == "constant") p.shape = ProgramShape::Constant;
  else if (shape == "ramp") p.shape = ProgramShape::Ramp;
  else if (shape == "ramp_hold") p.shape = ProgramShape::RampHold;
  else if (shape == "sinusoid") p.shape = ProgramShape::Sinusoid;
  else throw ConfigError("problem: unknown program shape '" + shape + "'");
  if (!(p.t_ramp > 0.0)) throw ConfigError("problem: t_ramp must be positive");
  return p;
}

inline json to_json(const Program& p) {
  static const char* names[] = {"constant", "ramp", "ramp_hold", "sinusoid"};
  return {{"shape", names[static_cast<int>(p.shape)]},
          {"value", p.value},
          {"t_ramp", p.t_ramp},
          {"frequency", p.frequency}};
}

inline MaterialSpec material_from_json(const json& j) {
  MaterialSpec m;
  const std::string model = j.value("model", "neo_hookean");
  if (model == "neo_hookean") m.hyper_model = HyperModel::NeoHookean;
  else if (model == "gent") m.hyper_model = HyperModel::Gent;
  else throw ConfigError("material: unknown model '" + model + "'");
  m.mu = j.at("mu").get<double>();
  m.Im = j.value("Im", 1.0);
  m.incompressible = j.value("incompressible", true);
  m.kappa = j.value("kappa", 0.0);
  m.mu0 = j.value("mu0", 1.2566);
  for (const auto& b : j.value("maxwell", json::array()))
    m.maxwell_branches.push_back({b.at("mu_v").get<double>(), b.at("tau").get<double>()});
  const std::string mag = j.value("magnetic", "none");
  if (mag == "none") m.magnetic_mode = MagneticMode::None;
  else if (mag == "hard") m.magnetic_mode = MagneticMode::Hard;
  else if (mag == "soft") m.magnetic_mode = MagneticMode::Soft;
  else throw ConfigError("material: unknown magnetic mode '" + mag + "'");
  if (j.contains("Br")) m.Br = vec3(j["Br"]);
  m.alpha = j.value("alpha", -0.5);
  m.beta = j.value("beta", -4.0);
  m.eta = j.value("eta", -0.5);
  m.validate();
  return m;
}

inline json to_json(const MaterialSpec& m) {
  json b = json::array();
  for (const auto& br : m.maxwell_branches) b.push_back({{"mu_v", br.mu_v}, {"tau", br.tau}});
  static const char* mag[] = {"none", "hard", "soft"};
  return {{"model", m.hyper_model == HyperModel::Gent ? "gent" : "neo_hookean"},
          {"mu", m.mu},
          {"Im", m.Im},
          {"incompressible", m.incompressible},
          {"kappa", m.kappa},
          {"mu0", m.mu0},
          {"maxwell", b},
          {"magnetic", mag[static_cast<int>(m.magnetic_mode)]},
          {"Br", to_json(m.Br)},
          {"alpha", m.alpha},
          {"beta", m.beta},
          {"eta", m.eta}};
}

// Node sets given as axis-aligned boxes {"name", "lo", "hi"}.
inline void sets_from_json(MixedMesh& mesh, const json& j) {
  for (const auto& s : j) {
    const Vector3 lo = vec3(s.at("lo")), hi = vec3(s.at("hi"));
    auto inside = [lo, hi](const Vector3& x) {
      return (x.array() >= lo.array() - 1e-9).all() && (x.array() <= hi.array() + 1e-9).all();
    };
    const std::string name = s.at("name");
    add_node_set(mesh, name, inside);
    add_face_set(mesh, name, inside);
  }
}

inline MixedMesh mesh_from_json(const json& j, const std::string& base_dir) {
  MixedMesh mesh;
  if (j.contains("file")) {
    std::string path = j["file"];
    if (!path.empty() && path[0] != '/' && !base_dir.empty()) path = base_dir + "/" + path;
    mesh = read_mesh_file(path);
    if (mesh.node_sets.empty()) add_bounding_box_sets(mesh);
  } else {
    MeshBuilder b;
    for (const auto& box : j.at("boxes")) {
      const auto d = box.at("divisions");
      b.add_box(box.contains("origin") ? vec3(box["origin"]) : Vector3::Zero(),
                vec3(box.at("extent")), {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()},
                box.value("region", 0));
    }
    mesh = b.build();
  }
  if (j.contains("sets")) sets_from_json(mesh, j["sets"]);
  check_geometry(mesh);
  return mesh;
}

}  // namespace detail

/// Parses a "magfem-problem/1" document. Relative mesh paths resolve against
/// `base_dir`.
inline Problem problem_from_json(const nlohmann::json& j, const std::string& base_dir = "") {
  using detail::vec3;
  try {
    if (j.value("format", "") != "magfem-problem/1")
      throw ConfigError("problem: expected \"format\": \"magfem-problem/1\"");
    Problem p;
    p.name = j.value("name", "problem");
    p.mesh = detail::mesh_from_json(j.at("mesh"), base_dir);
    for (const auto& m : j.at("materials"))
      p.materials[m.value("region", 0)] = detail::material_from_json(m);
    for (const auto& d : j.value("dirichlet", nlohmann::json::array())) {
      DirichletBC bc;
      bc.set = d.at("set");
      const std::string f = d.value("field", "u");
      if (f == "u") bc.field = Field::Displacement;
      else if (f == "phi") bc.field = Field::Potential;
      else throw ConfigError("problem: unknown field '" + f + "'");
      bc.component = d.value("component", 0);
      bc.program = d.contains("program") ? detail::program_from_json(d["program"])
                                         : Program::constant(0.0);
      p.dirichlet.push_back(bc);
    }
    for (const auto& d : j.value("neumann", nlohmann::json::array())) {
      NeumannBC bc;
      bc.set = d.at("set");
      const std::string k = d.value("kind", "traction");
      if (k == "traction") bc.kind = NeumannKind::Traction;
      else if (k == "surface_charge") bc.kind = NeumannKind::SurfaceCharge;
      else throw ConfigError("problem: unknown neumann kind '" + k + "'");
      if (d.contains("direction")) bc.direction = vec3(d["direction"]);
      bc.program = detail::program_from_json(d.at("program"));
      p.neumann.push_back(bc);
    }
    if (j.contains("applied_field")) {
      const auto& a = j["applied_field"];
      p.field_direction = vec3(a.at("direction"));
      p.field_program = detail::program_from_json(a.at("program"));
    }
    const auto& t = j.at("time");
    p.time.t_start = t.value("t_start", 0.0);
    if (t.contains("grid")) {
      p.time.set_grid(p.time.t_start, t["grid"].get<std::vector<double>>());
    } else {
      p.time.t_end = t.at("t_end");
      p.time.steps = t.contains("steps")
                         ? t["steps"].get<int>()
                         : static_cast<int>(std::lround((p.time.t_end - p.time.t_start) /
                                                        t.at("dt").get<double>()));
    }
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      p.solver.tol_rel = s.value("tol_rel", p.solver.tol_rel);
      p.solver.tol_abs = s.value("tol_abs", p.solver.tol_abs);
      p.solver.max_iter = s.value("max_iter", p.solver.max_iter);
      p.solver.max_halvings = s.value("max_halvings", p.solver.max_halvings);
      p.solver.rho_inf = s.value("rho_inf", p.solver.rho_inf);
      p.solver.threads = s.value("threads", p.solver.threads);
    }
    for (const auto& pr : j.value("probes", nlohmann::json::array())) {
      ProbeSpec ps;
      ps.name = pr.at("name");
      const std::string k = pr.at("kind");
      if (k == "u") ps.kind = ProbeKind::Displacement;
      else if (k == "phi") ps.kind = ProbeKind::Potential;
      else if (k == "p") ps.kind = ProbeKind::Pressure;
      else if (k == "max_abs_J_minus_1") ps.kind = ProbeKind::MaxAbsJMinus1;
      else if (k == "min_J") ps.kind = ProbeKind::MinJ;
      else if (k == "reaction") ps.kind = ProbeKind::Reaction;
      else throw ConfigError("problem: unknown probe kind '" + k + "'");
      if (pr.contains("point")) ps.point = vec3(pr["point"]);
      ps.component = pr.value("component", 0);
      ps.set = pr.value("set", "");
      p.probes.push_back(ps);
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("problem: malformed document: ") + e.what());
  }
}

inline Problem read_problem_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
  const auto slash = path.find_last_of('/');
  return problem_from_json(j, slash == std::string::npos ? "" : path.substr(0, slash));
}

}  // namespace magfem
