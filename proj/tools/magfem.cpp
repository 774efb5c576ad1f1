// magfem command line: scenarios, viscoelastic sweeps, analytical oracles and
// mesh export.
//
// Exit codes: 0 all checks passed, 1 a tolerance check failed, 2 a solver or
// configuration error.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "magfem/io.hpp"
#include "magfem/mesh.hpp"
#include "magfem/oracles.hpp"
#include "magfem/scenarios.hpp"
#include "magfem/solver.hpp"

namespace fs = std::filesystem;
using namespace magfem;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

struct ScenarioOptions {
  std::string name;
  std::string config;
  std::vector<std::string> sets;
  int level = 0;
  double dt = 0.0;
  double tol = 0.0;
  double mu_v = -1.0;
  double tau = -1.0;
  double t_end = 0.0;
};

void put(json& p, const std::string& scenario, const std::string& key, const json& v) {
  if (!p.contains(key))
    throw ConfigError("scenario " + scenario + " has no parameter '" + key + "'");
  p[key] = v;
}

json parse_value(const std::string& s) {
  try {
    return json::parse(s);
  } catch (const json::exception&) {
    return s;
  }
}

json scenario_parameters(const ScenarioOptions& o) {
  json overrides = json::object();
  if (!o.config.empty()) {
    std::ifstream is(o.config);
    if (!is) throw IoError("cannot open '" + o.config + "'");
    try {
      is >> overrides;
    } catch (const json::exception& e) {
      throw ConfigError("'" + o.config + "': " + e.what());
    }
    if (!overrides.is_object()) throw ConfigError("'" + o.config + "': expected a JSON object");
  }
  json p = scenario_params(o.name, overrides);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    put(p, o.name, kv.substr(0, eq), parse_value(kv.substr(eq + 1)));
  }
  if (o.level > 0) put(p, o.name, "level", o.level);
  if (o.mu_v >= 0.0) put(p, o.name, "mu_v", o.mu_v);
  if (o.tau >= 0.0) put(p, o.name, "tau", o.tau);
  if (o.t_end > 0.0) put(p, o.name, "t_end", o.t_end);
  if (o.dt > 0.0) {
    if (p.contains("dt")) p["dt"] = o.dt;
    else if (p.contains("increment")) p["increment"] = o.dt * p["potential"].get<double>();
    else if (p.contains("steps")) p["steps"] = std::max(1, static_cast<int>(std::lround(1.0 / o.dt)));
    else throw ConfigError("scenario " + o.name + " has no step size");
  }
  return p;
}

void apply_solver_flags(Problem& pb, const ScenarioOptions& o) {
  if (o.tol > 0.0) pb.solver.tol_rel = o.tol;
}

std::string output_path(const std::string& dir, const std::string& file) {
  fs::create_directories(dir);
  return (fs::path(dir) / file).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

struct RunOutput {
  std::string dir = "out";
  bool vtk = false;
  bool vtk_sub8 = false;
};

VtkCells vtk_cells(const RunOutput& out) {
  return out.vtk_sub8 ? VtkCells::SubHex8 : VtkCells::Lagrange27;
}

// Runs a problem, writing the probe CSV and optional VTK series.
void run_problem(const Problem& pb, const RunOutput& out) {
  Solver s(pb);
  const std::string csv_path = output_path(out.dir, pb.name + ".csv");
  auto os = open_out(csv_path);
  ProbeCsv csv(os, s.problem());
  int total = 0, steps = 0, cuts = 0;
  s.run([&](const StepReport& r) {
    csv.row(r);
    total += r.iterations;
    ++steps;
    cuts += r.cuts;
    if (out.vtk) {
      std::ostringstream name;
      name << pb.name << "_" << std::setw(4) << std::setfill('0') << r.step << ".vtk";
      write_vtk_file(s, output_path(out.dir, name.str()), vtk_cells(out));
    }
  });
  std::printf("%s: %d steps, %.2f iterations/step, %d cuts -> %s\n", pb.name.c_str(), steps,
              steps ? double(total) / steps : 0.0, cuts, csv_path.c_str());
  const auto v = s.evaluate_probes();
  for (std::size_t i = 0; i < v.size(); ++i)
    std::printf("  %-20s %.10g\n", pb.probes[i].name.c_str(), v[i]);
}

int run_cube_hard(const json& p, const ScenarioOptions& o, const RunOutput& out) {
  const double tol = p["tolerance"], L = p["edge"];
  const std::string path = output_path(out.dir, "cube_hard_oracle.csv");
  auto os = open_out(path);
  os << "# magfem-oracle v1\nk,lambda_analytic,lambda_numeric,relative_error\n" << std::setprecision(17);
  bool ok = true;
  for (double k : cube_hard_k_values(p)) {
    json q = p;
    q["k"] = k;
    auto pb = build_cube_hard(q);
    apply_solver_flags(pb, o);
    Solver s(pb);
    s.run();
    const auto r = make_oracle_result(k, cubic_stretch_oracle(k), 1.0 + s.evaluate_probes()[0] / L);
    os << k << "," << r.analytic << "," << r.numeric << "," << r.rel_error << "\n";
    const bool pass = r.rel_error <= tol;
    ok = ok && pass;
    std::printf("k %+8.4f  lambda %.10f  oracle %.10f  rel err %.2e %s\n", k, r.numeric, r.analytic,
                r.rel_error, pass ? "ok" : "FAIL");
  }
  std::printf("cube_hard -> %s: %s\n", path.c_str(), ok ? "all within tolerance" : "tolerance breached");
  return ok ? 0 : kExitCheckFailed;
}

int run_cube_soft_gent(const json& p, const ScenarioOptions& o, const RunOutput& out) {
  const double tol = p["tolerance"], fraction = p["fraction"], L = p["edge"];
  const std::string path = output_path(out.dir, "cube_soft_gent_oracle.csv");
  auto os = open_out(path);
  os << "# magfem-oracle v1\nIm,lambda_numeric,phibar_applied,phibar_analytic,relative_error\n"
     << std::setprecision(17);
  bool ok = true;
  for (double Im : p["Im_values"].get<std::vector<double>>()) {
    json q = p;
    q["Im"] = Im;
    const auto br = gent_ascending_branch(Im);
    const double target = fraction * br.phibar_max;
    auto pb = build_cube_soft_gent(q, target);
    apply_solver_flags(pb, o);
    Solver s(pb);
    double worst = 0.0;
    s.run([&](const StepReport& r) {
      const double lam = 1.0 + r.probe_values[0] / L;
      const double applied = target * r.t;
      const auto res = make_oracle_result(lam, gent_potential_oracle(lam, Im), applied);
      os << Im << "," << lam << "," << applied << "," << res.analytic << "," << res.rel_error << "\n";
      worst = std::max(worst, res.rel_error);
    });
    const bool pass = worst <= tol;
    ok = ok && pass;
    std::printf("Im %5g  phibar up to %.6f (%.2f of branch max %.6f)  worst rel err %.2e %s\n", Im,
                target, fraction, br.phibar_max, worst, pass ? "ok" : "FAIL");
  }
  std::printf("cube_soft_gent -> %s: %s\n", path.c_str(), ok ? "all within tolerance" : "tolerance breached");
  return ok ? 0 : kExitCheckFailed;
}

int cmd_run(const ScenarioOptions& o, const std::string& problem_file, const RunOutput& out) {
  if (!problem_file.empty()) {
    auto pb = read_problem_file(problem_file);
    apply_solver_flags(pb, o);
    run_problem(pb, out);
    return 0;
  }
  if (o.name.empty()) throw ConfigError("run: give a scenario name or --problem FILE");
  const json p = scenario_parameters(o);
  if (o.name == "cube_hard") return run_cube_hard(p, o, out);
  if (o.name == "cube_soft_gent") return run_cube_soft_gent(p, o, out);
  auto pb = build_scenario(o.name, p);
  apply_solver_flags(pb, o);
  run_problem(pb, out);
  return 0;
}

struct Combination {
  double mu_v = 0.0, tau = 0.0;  ///< mu_v = 0: hyperelastic reference
  std::vector<StepReport> reports;
  std::string error;
};

int cmd_sweep(const ScenarioOptions& o, std::vector<double> mu_v, std::vector<double> tau,
              int jobs, const RunOutput& out) {
  if (o.name.empty()) throw ConfigError("sweep: give a scenario name");
  const json base = scenario_parameters(o);
  if (!base.contains("mu_v") || !base.contains("tau"))
    throw ConfigError("sweep: scenario " + o.name + " has no viscoelastic parameters");
  if (mu_v.empty() && base["mu_v"].is_array()) mu_v = base["mu_v"].get<std::vector<double>>();
  if (tau.empty() && base["tau"].is_array()) tau = base["tau"].get<std::vector<double>>();
  if (mu_v.empty() || tau.empty()) throw ConfigError("sweep: empty mu_v or tau list");

  std::vector<Combination> combos{{}};
  for (double m : mu_v)
    for (double t : tau) combos.push_back({m, t, {}, {}});
  Problem shape = build_scenario(o.name, base);

  std::atomic<std::size_t> next{0};
  std::mutex print;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < combos.size();) {
      auto& c = combos[i];
      try {
        json p = base;
        if (c.mu_v > 0.0) p["mu_v"] = c.mu_v, p["tau"] = c.tau;
        auto pb = build_scenario(o.name, p);
        apply_solver_flags(pb, o);
        pb.solver.threads = 1;
        Solver s(pb);
        c.reports = s.run();
      } catch (const std::exception& e) {
        c.error = e.what();
      }
      std::lock_guard lock(print);
      if (c.mu_v > 0.0) std::printf("mu_v %g tau %g: ", c.mu_v, c.tau);
      else std::printf("hyperelastic: ");
      std::printf("%s\n", c.error.empty() ? "ok" : c.error.c_str());
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  const std::string path = output_path(out.dir, o.name + "_sweep.csv");
  auto os = open_out(path);
  os << "# magfem-sweep v1\nmu_v,tau,t,step,iterations";
  for (const auto& pr : shape.probes) os << "," << pr.name;
  os << "\n" << std::setprecision(17);
  int failed = 0;
  for (const auto& c : combos) {
    if (!c.error.empty()) {
      ++failed;
      os << "# failed mu_v=" << c.mu_v << " tau=" << c.tau << ": " << c.error << "\n";
    }
    for (const auto& r : c.reports) {
      os << c.mu_v << "," << c.tau << "," << r.t << "," << r.step << "," << r.iterations;
      for (double v : r.probe_values) os << "," << v;
      os << "\n";
    }
  }
  std::printf("%zu combinations (hyperelastic reference first), %d failed -> %s\n", combos.size(),
              failed, path.c_str());
  return failed == 0 ? 0 : kExitError;
}

int cmd_mesh(const ScenarioOptions& o, const RunOutput& out) {
  if (o.name.empty()) throw ConfigError("mesh: give a scenario name");
  json p = scenario_parameters(o);
  const Problem pb = o.name == "cube_soft_gent" ? build_cube_soft_gent(p, 0.0) : build_scenario(o.name, p);
  const std::string mesh_path = output_path(out.dir, o.name + ".mesh");
  write_mesh_file(pb.mesh, mesh_path);
  Solver s(pb);
  const std::string vtk_path = output_path(out.dir, o.name + "_mesh.vtk");
  write_vtk_file(s, vtk_path, vtk_cells(out));
  std::printf("%s: %zu control points, %zu elements, %d dofs -> %s, %s\n", o.name.c_str(),
              pb.mesh.nodes.size(), pb.mesh.elems_u.size(), s.dofs().size(), mesh_path.c_str(),
              vtk_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magfem: finite-strain magneto-active polymer solver"};
  app.require_subcommand(1);

  ScenarioOptions so;
  RunOutput out;
  std::string problem_file;
  std::vector<double> sweep_mu_v, sweep_tau;
  int jobs = 1;

  auto scenario_flags = [&](CLI::App* c) {
    c->add_option("--level", so.level, "mesh level (beam M1..M5, bilayer M1..M3)");
    c->add_option("--dt", so.dt, "time step, or load increment as a fraction of the peak");
    c->add_option("--tol", so.tol, "relative Newton tolerance");
    c->add_option("--config", so.config, "JSON object of scenario parameter overrides");
    c->add_option("--set", so.sets, "parameter override key=value (repeatable)");
    c->add_option("--t-end", so.t_end, "final time");
    c->add_option("--out", out.dir, "output directory")->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "run a scenario or a problem file");
  run->add_option("scenario", so.name, "scenario name")->check(CLI::IsMember(scenario_names()));
  run->add_option("--problem", problem_file, "problem definition file (magfem-problem/1)");
  run->add_option("--mu-v", so.mu_v, "viscous shear modulus of one Maxwell branch");
  run->add_option("--tau", so.tau, "relaxation time of that branch");
  run->add_flag("--vtk", out.vtk, "write a VTK file per step");
  run->add_flag("--vtk-sub8", out.vtk_sub8, "export each element as 8 linear hexahedra");
  scenario_flags(run);

  auto* sweep = app.add_subcommand("sweep", "viscoelastic parameter study with hyperelastic reference");
  sweep->add_option("scenario", so.name, "scenario name")->required()->check(CLI::IsMember(scenario_names()));
  sweep->add_option("--mu-v", sweep_mu_v, "viscous shear moduli (default: scenario list)");
  sweep->add_option("--tau", sweep_tau, "relaxation times (default: scenario list)");
  sweep->add_option("--jobs", jobs, "combinations run concurrently")->capture_default_str();
  scenario_flags(sweep);

  auto* oracle = app.add_subcommand("oracle", "evaluate analytical relations");
  oracle->require_subcommand(1);
  double k = 0.0, lambda = 1.0, Im = 1.0, phibar = 0.0;
  auto* cubic = oracle->add_subcommand("cubic", "principal stretch of the hard-magnetic cube");
  cubic->add_option("k", k, "Br.Ba/(mu mu0)")->required();
  auto* gent = oracle->add_subcommand("gent", "normalized potential of the soft Gent cube");
  gent->add_option("lambda", lambda, "stretch")->required();
  gent->add_option("Im", Im, "Gent locking parameter")->required();
  auto* gent_inv = oracle->add_subcommand("gent-inverse", "stretch for a normalized potential");
  gent_inv->add_option("phibar", phibar, "normalized potential")->required();
  gent_inv->add_option("Im", Im, "Gent locking parameter")->required();

  auto* mesh = app.add_subcommand("mesh", "write the scenario mesh and an undeformed VTK file");
  mesh->add_option("scenario", so.name, "scenario name")->required()->check(CLI::IsMember(scenario_names()));
  mesh->add_flag("--vtk-sub8", out.vtk_sub8, "export each element as 8 linear hexahedra");
  scenario_flags(mesh);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(so, problem_file, out);
    if (*sweep) return cmd_sweep(so, sweep_mu_v, sweep_tau, jobs, out);
    if (*mesh) return cmd_mesh(so, out);
    if (*cubic) {
      std::printf("%.15g\n", cubic_stretch_oracle(k));
    } else if (*gent) {
      std::printf("%.15g\n", gent_potential_oracle(lambda, Im));
    } else if (*gent_inv) {
      std::printf("%.15g\n", gent_stretch_for_potential(phibar, Im));
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
}
