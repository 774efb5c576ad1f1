#pragma once

// Benchmark scenarios. Each scenario is a JSON parameter object (defaults
// below, mirrored in data/scenario_manifest.json) and a builder that turns a
// parameter object into a Problem.

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "magfem/problem.hpp"

namespace magfem {

using nlohmann::json;

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "cube_hard",          "beam_hard",    "pattern_hard", "gripper_hard",
      "cube_soft_gent",     "bilayer_beam_soft", "gripper_soft"};
  return names;
}

inline json scenario_defaults(const std::string& name) {
  if (name == "cube_hard")
    return {{"edge", 1.0},
            {"mu", 1000.0},
            {"mu0", 0.001},
            {"Br", 1.0},
            {"k", 3.0},
            {"k_min", -5.0},
            {"k_max", 5.0},
            {"k_count", 20},
            {"steps", 10},
            {"tolerance", 1e-6}};
  if (name == "beam_hard")
    return {{"length", 17.2},
            {"width", 5.0},
            {"thickness", 0.84},
            {"mu", 303e3},
            {"mu0", 1.2566},
            {"Br", 143.0},
            {"Ba", 50.0},
            {"level", 1},
            {"steps", 100},
            {"plane_strain", true}};
  if (name == "pattern_hard")
    return {{"center_half_width", 2.5},
            {"arm_length", 7.5},
            {"thickness", 1.0},
            {"arm_divisions", 3},
            {"mu", 330e3},
            {"mu0", 1.2566},
            {"Br", 102.0},
            {"Ba", -200.0},
            {"t_ramp", 10.0},
            {"dt", 0.1},
            {"t_end", 10.0},
            {"hold_dt", 0.1},
            {"mu_v", json::array({165e3, 330e3, 660e3})},
            {"tau", json::array({0.05, 0.5, 5.0, 30.0})}};
  if (name == "gripper_hard")
    return {{"center_half_width", 2.5},
            {"arm_length", 10.0},
            {"thickness", 1.0},
            {"arm_divisions", 4},
            {"mu", 330e3},
            {"mu0", 1.2566},
            {"Br", 1.0},
            {"Ba", -1000.0},
            {"loading", "ramp"},
            {"t_ramp", 10.0},
            {"frequency", 0.5},
            {"dt", 0.1},
            {"t_end", 10.0},
            {"mu_v", json::array()},
            {"tau", json::array()}};
  if (name == "cube_soft_gent")
    return {{"edge", 1.0},
            {"mu", 1.0},
            {"mu0", 1.0},
            {"Im", 5.0},
            {"Im_values", json::array({5.0, 10.0, 50.0})},
            {"fraction", 0.95},
            {"steps", 20},
            {"tolerance", 1e-4}};
  if (name == "bilayer_beam_soft")
    return {{"length", 20.0},
            {"layer_thickness", 1.0},
            {"width", 2.0},
            {"mu", 30e3},
            {"mu0", 1.2566},
            {"alpha", -0.5},
            {"beta", -4.0},
            {"eta", -0.5},
            {"level", 1},
            {"potential", 700.0},
            {"increment", 100.0}};
  if (name == "gripper_soft")
    return {{"center_half_width", 2.5},
            {"arm_length", 30.0},
            {"layer_thickness", 1.0},
            {"arm_divisions", 8},
            {"mu", 30e3},
            {"mu0", 1.2566},
            {"alpha", -0.5},
            {"beta", -4.0},
            {"eta", -0.5},
            {"potential", 1200.0},
            {"t_ramp", 10.0},
            {"dt", 0.5},
            {"t_end", 10.0},
            {"mu_v", json::array({30e3, 60e3, 150e3})},
            {"tau", json::array({0.5, 5.0})}};
  throw ConfigError("unknown scenario '" + name + "'");
}

/// Defaults with `overrides` merged on top; unknown keys are rejected.
inline json scenario_params(const std::string& name, const json& overrides = json::object()) {
  json p = scenario_defaults(name);
  for (const auto& [k, v] : overrides.items()) {
    if (!p.contains(k)) throw ConfigError("scenario " + name + ": unknown parameter '" + k + "'");
    p[k] = v;
  }
  return p;
}

namespace detail {

inline ProbeSpec probe(const std::string& name, ProbeKind kind, const Vector3& X = Vector3::Zero(),
                       int component = 0) {
  ProbeSpec p;
  p.name = name;
  p.kind = kind;
  p.point = X;
  p.component = component;
  return p;
}

inline void add_fixed(Problem& pb, const std::string& set, int component) {
  pb.dirichlet.push_back({set, Field::Displacement, component, Program::constant(0.0)});
}

inline void add_clamp(Problem& pb, const std::string& set) {
  for (int c = 0; c < 3; ++c) add_fixed(pb, set, c);
}

inline void add_axis_box_set(MixedMesh& m, const std::string& name, const Vector3& lo,
                             const Vector3& hi) {
  auto inside = [lo, hi](const Vector3& x) {
    return (x.array() >= lo.array() - 1e-9).all() && (x.array() <= hi.array() + 1e-9).all();
  };
  add_node_set(m, name, inside);
  add_face_set(m, name, inside);
}

// Ramp to t_ramp with step dt, then hold to t_end with step hold_dt.
inline std::vector<double> ramp_hold_grid(double t_ramp, double dt, double t_end, double hold_dt) {
  std::vector<double> g;
  const int nr = std::max(1, static_cast<int>(std::lround(t_ramp / dt)));
  for (int k = 1; k <= nr; ++k) g.push_back(t_ramp * k / nr);
  if (t_end > t_ramp) {
    const int nh = std::max(1, static_cast<int>(std::lround((t_end - t_ramp) / hold_dt)));
    for (int k = 1; k <= nh; ++k) g.push_back(t_ramp + (t_end - t_ramp) * k / nh);
  }
  return g;
}

inline std::vector<MaxwellBranch> branches_of(const json& p) {
  std::vector<MaxwellBranch> b;
  if (p.contains("mu_v") && p["mu_v"].is_number() && p.contains("tau") && p["tau"].is_number())
    b.push_back({p["mu_v"].get<double>(), p["tau"].get<double>()});
  return b;
}

// Quarter of a plus-shaped plate: center block [0,c]^2 with one arm along +x
// (region 1) and one along +y (region 2), layers stacked in z.
inline MixedMesh quarter_cross(double c, double arm, const std::vector<double>& layers,
                               int arm_div, const std::vector<int>& layer_region_offset) {
  MeshBuilder b;
  double z = 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const int off = layer_region_offset[l];
    b.add_box(Vector3(0, 0, z), Vector3(c, c, layers[l]), {1, 1, 1}, off + 0);
    b.add_box(Vector3(c, 0, z), Vector3(arm, c, layers[l]), {arm_div, 1, 1}, off + 1);
    b.add_box(Vector3(0, c, z), Vector3(c, arm, layers[l]), {1, arm_div, 1}, off + 2);
    z += layers[l];
  }
  return b.build();
}

}  // namespace detail

/// Stretch parameter k of the hard-magnetic cube for a given applied field.
inline double cube_hard_k(const json& p) {
  return p["Br"].get<double>() * p["k"].get<double>();
}

inline std::vector<double> cube_hard_k_values(const json& p) {
  const int n = p["k_count"];
  const double a = p["k_min"], b = p["k_max"];
  std::vector<double> k;
  for (int i = 0; i < n; ++i) k.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return k;
}

inline Problem build_cube_hard(const json& p) {
  const double L = p["edge"], mu = p["mu"], mu0 = p["mu0"], Br = p["Br"], k = p["k"];
  Problem pb;
  pb.name = "cube_hard";
  pb.mesh = structured_hex_mesh(Vector3::Constant(L), {1, 1, 1});
  MaterialSpec m;
  m.mu = mu;
  m.mu0 = mu0;
  m.magnetic_mode = MagneticMode::Hard;
  m.Br = Vector3(0, Br, 0);
  pb.materials[0] = m;
  detail::add_fixed(pb, "xmin", 0);
  detail::add_fixed(pb, "ymin", 1);
  detail::add_fixed(pb, "zmin", 2);
  // k = Br Ba / (mu mu0)
  pb.field_direction = Vector3::UnitY();
  pb.field_program = Program::ramp(k * mu * mu0 / Br, 1.0);
  pb.time.steps = p["steps"];
  pb.probes = {detail::probe("u_y", ProbeKind::Displacement, Vector3(0.5 * L, L, 0.5 * L), 1),
               detail::probe("u_x", ProbeKind::Displacement, Vector3(L, 0.5 * L, 0.5 * L), 0),
               detail::probe("max_abs_J_minus_1", ProbeKind::MaxAbsJMinus1)};
  return pb;
}

/// Potential on the top face that holds the cube at normalized potential
/// `phibar` = (phi / L) sqrt(mu0 / mu).
inline double cube_soft_potential(const json& p, double phibar) {
  const double L = p["edge"], mu = p["mu"], mu0 = p["mu0"];
  return phibar * L * std::sqrt(mu / mu0);
}

inline Problem build_cube_soft_gent(const json& p, double phibar_max) {
  const double L = p["edge"];
  Problem pb;
  pb.name = "cube_soft_gent";
  pb.mesh = structured_hex_mesh(Vector3::Constant(L), {1, 1, 1});
  MaterialSpec m;
  m.mu = p["mu"];
  m.mu0 = p["mu0"];
  m.hyper_model = HyperModel::Gent;
  m.Im = p["Im"];
  m.magnetic_mode = MagneticMode::Soft;
  m.alpha = m.beta = m.eta = 0.0;
  pb.materials[0] = m;
  detail::add_fixed(pb, "xmin", 0);
  detail::add_fixed(pb, "ymin", 1);
  detail::add_fixed(pb, "zmin", 2);
  pb.dirichlet.push_back({"zmin", Field::Potential, 0, Program::constant(0.0)});
  pb.dirichlet.push_back(
      {"zmax", Field::Potential, 0, Program::ramp(cube_soft_potential(p, phibar_max), 1.0)});
  pb.time.steps = p["steps"];
  pb.probes = {detail::probe("u_x", ProbeKind::Displacement, Vector3(L, 0.5 * L, 0.5 * L), 0),
               detail::probe("u_y", ProbeKind::Displacement, Vector3(0.5 * L, L, 0.5 * L), 1),
               detail::probe("u_z", ProbeKind::Displacement, Vector3(0.5 * L, 0.5 * L, L), 2)};
  return pb;
}

/// Elements along (length, thickness) of beam mesh level m; the through-
/// thickness node count is 8 * 2^(m-1) + 1.
inline std::array<int, 3> beam_divisions(int level) {
  if (level < 1 || level > 5) throw ConfigError("beam mesh level must be in 1..5");
  const int s = 1 << (level - 1);
  return {8 * s, 4 * s, 1};
}

inline Problem build_beam_hard(const json& p) {
  const double L = p["length"], W = p["width"], h = p["thickness"];
  Problem pb;
  pb.name = "beam_hard";
  pb.mesh = structured_hex_mesh(Vector3(L, h, W), beam_divisions(p["level"]));
  detail::add_axis_box_set(pb.mesh, "all", Vector3::Constant(-1e30), Vector3::Constant(1e30));
  MaterialSpec m;
  m.mu = p["mu"];
  m.mu0 = p["mu0"];
  m.magnetic_mode = MagneticMode::Hard;
  m.Br = Vector3(p["Br"].get<double>(), 0, 0);
  pb.materials[0] = m;
  if (p["plane_strain"].get<bool>()) detail::add_fixed(pb, "all", 2);
  detail::add_clamp(pb, "xmin");
  pb.field_direction = Vector3::UnitY();
  pb.field_program = Program::ramp(p["Ba"].get<double>(), 1.0);
  pb.time.steps = p["steps"];
  const Vector3 tip(L, 0.5 * h, 0.5 * W);
  pb.probes = {detail::probe("tip_u_x", ProbeKind::Displacement, tip, 0),
               detail::probe("tip_u_y", ProbeKind::Displacement, tip, 1),
               detail::probe("max_abs_J_minus_1", ProbeKind::MaxAbsJMinus1),
               detail::probe("min_J", ProbeKind::MinJ)};
  return pb;
}

namespace detail {

// Hard-magnetic quarter cross: arms magnetized outward along their axis,
// center unmagnetized, applied field along z.
inline Problem hard_cross(const std::string& name, const json& p, const Program& field) {
  const double c = p["center_half_width"], arm = p["arm_length"], t = p["thickness"];
  const double Br = p["Br"];
  Problem pb;
  pb.name = name;
  pb.mesh = quarter_cross(c, arm, {t}, p["arm_divisions"], {0});
  add_axis_box_set(pb.mesh, "axis", Vector3(-1e-9, -1e-9, -1e30), Vector3(1e-9, 1e-9, 1e30));
  MaterialSpec base;
  base.mu = p["mu"];
  base.mu0 = p["mu0"];
  base.magnetic_mode = MagneticMode::Hard;
  base.maxwell_branches = branches_of(p);
  for (int r = 0; r < 3; ++r) {
    MaterialSpec m = base;
    m.Br = r == 1 ? Vector3(Br, 0, 0) : r == 2 ? Vector3(0, Br, 0) : Vector3::Zero();
    pb.materials[r] = m;
  }
  add_fixed(pb, "xmin", 0);
  add_fixed(pb, "ymin", 1);
  add_fixed(pb, "axis", 2);
  pb.field_direction = Vector3::UnitZ();
  pb.field_program = field;
  const Vector3 tip(0.5 * c, c + arm, 0.5 * t);
  pb.probes = {probe("tip_u_z", ProbeKind::Displacement, tip, 2),
               probe("tip_u_y", ProbeKind::Displacement, tip, 1),
               probe("min_J", ProbeKind::MinJ)};
  return pb;
}

}  // namespace detail

/// Single (mu_v, tau) run of the pattern: set "mu_v" and "tau" to numbers to
/// add one Maxwell branch; arrays (the sweep lists) mean hyperelastic.
inline Problem build_pattern_hard(const json& p) {
  auto pb = detail::hard_cross("pattern_hard", p,
                               Program::ramp_hold(p["Ba"].get<double>(), p["t_ramp"].get<double>()));
  pb.time.set_grid(0.0, detail::ramp_hold_grid(p["t_ramp"], p["dt"], p["t_end"], p["hold_dt"]));
  return pb;
}

inline Problem build_gripper_hard(const json& p) {
  const std::string loading = p["loading"];
  Program field;
  if (loading == "ramp") field = Program::ramp_hold(p["Ba"].get<double>(), p["t_ramp"].get<double>());
  else if (loading == "sinusoid") field = Program::sinusoid(p["Ba"].get<double>(), p["frequency"].get<double>());
  else throw ConfigError("gripper_hard: loading must be 'ramp' or 'sinusoid'");
  auto pb = detail::hard_cross("gripper_hard", p, field);
  pb.time.t_end = p["t_end"];
  pb.time.steps = static_cast<int>(std::lround(pb.time.t_end / p["dt"].get<double>()));
  return pb;
}

namespace detail {

inline MaterialSpec soft_material(const json& p, bool active) {
  MaterialSpec m;
  m.mu = p["mu"];
  m.mu0 = p["mu0"];
  m.magnetic_mode = MagneticMode::Soft;
  m.alpha = active ? p["alpha"].get<double>() : 0.0;
  m.beta = active ? p["beta"].get<double>() : 0.0;
  m.eta = active ? p["eta"].get<double>() : 0.0;
  m.maxwell_branches = branches_of(p);
  return m;
}

}  // namespace detail

/// Cantilever made of an active (region 0, upper) and a passive (region 1,
/// lower) layer; the potential difference is applied between the two ends.
inline Problem build_bilayer_beam_soft(const json& p) {
  const double L = p["length"], t = p["layer_thickness"], W = p["width"];
  const int level = p["level"];
  if (level < 1 || level > 3) throw ConfigError("bilayer mesh level must be in 1..3");
  const int s = 1 << (level - 1);
  Problem pb;
  pb.name = "bilayer_beam_soft";
  MeshBuilder b;
  b.add_box(Vector3::Zero(), Vector3(L, t, W), {10 * s, s, 2 * s}, 1);
  b.add_box(Vector3(0, t, 0), Vector3(L, t, W), {10 * s, s, 2 * s}, 0);
  pb.mesh = b.build();
  pb.materials[0] = detail::soft_material(p, true);
  pb.materials[1] = detail::soft_material(p, false);
  detail::add_clamp(pb, "xmin");
  pb.dirichlet.push_back({"xmin", Field::Potential, 0, Program::constant(0.0)});
  pb.dirichlet.push_back(
      {"xmax", Field::Potential, 0, Program::ramp(p["potential"].get<double>(), 1.0)});
  pb.time.steps = std::max(
      1, static_cast<int>(std::lround(p["potential"].get<double>() / p["increment"].get<double>())));
  const Vector3 tip(L, t, 0.5 * W);
  pb.probes = {detail::probe("tip_u_x", ProbeKind::Displacement, tip, 0),
               detail::probe("tip_u_y", ProbeKind::Displacement, tip, 1),
               detail::probe("tip_phi", ProbeKind::Potential, tip),
               detail::probe("max_abs_J_minus_1", ProbeKind::MaxAbsJMinus1)};
  return pb;
}

/// Quarter of a bilayer cross: active lower layer, passive upper layer. The
/// potential is zero over the center block and ramped on the arm end faces.
inline Problem build_gripper_soft(const json& p) {
  const double c = p["center_half_width"], arm = p["arm_length"], t = p["layer_thickness"];
  Problem pb;
  pb.name = "gripper_soft";
  pb.mesh = detail::quarter_cross(c, arm, {t, t}, p["arm_divisions"], {0, 3});
  detail::add_axis_box_set(pb.mesh, "axis", Vector3(-1e-9, -1e-9, -1e30),
                           Vector3(1e-9, 1e-9, 1e30));
  for (int r = 0; r < 6; ++r) pb.materials[r] = detail::soft_material(p, r < 3);
  detail::add_fixed(pb, "xmin", 0);
  detail::add_fixed(pb, "ymin", 1);
  detail::add_fixed(pb, "axis", 2);
  detail::add_axis_box_set(pb.mesh, "center", Vector3(-1e30, -1e30, -1e30),
                           Vector3(c, c, 1e30));
  const Program phi = Program::ramp_hold(p["potential"].get<double>(), p["t_ramp"].get<double>());
  pb.dirichlet.push_back({"center", Field::Potential, 0, Program::constant(0.0)});
  pb.dirichlet.push_back({"xmax", Field::Potential, 0, phi});
  pb.dirichlet.push_back({"ymax", Field::Potential, 0, phi});
  pb.time.t_end = p["t_end"];
  pb.time.steps = static_cast<int>(std::lround(pb.time.t_end / p["dt"].get<double>()));
  const Vector3 tip(0.5 * c, c + arm, t);
  pb.probes = {detail::probe("tip_u_z", ProbeKind::Displacement, tip, 2),
               detail::probe("tip_u_y", ProbeKind::Displacement, tip, 1)};
  return pb;
}

/// Builds the named scenario from a full parameter object.
inline Problem build_scenario(const std::string& name, const json& p) {
  if (name == "cube_hard") return build_cube_hard(p);
  if (name == "beam_hard") return build_beam_hard(p);
  if (name == "pattern_hard") return build_pattern_hard(p);
  if (name == "gripper_hard") return build_gripper_hard(p);
  if (name == "cube_soft_gent") {
    throw ConfigError("cube_soft_gent needs a target potential; use build_cube_soft_gent");
  }
  if (name == "bilayer_beam_soft") return build_bilayer_beam_soft(p);
  if (name == "gripper_soft") return build_gripper_soft(p);
  throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace magfem
