#pragma once

// Probe CSV, restart checkpoints and legacy VTK output.
//
// Checkpoint layout (text, whitespace separated, doubles with 17 digits):
//   magfem-checkpoint 1
//   time <t> step <k> reference <r>
//   dofs <n>            followed by n values
//   points <m> branches <b>
//   then per point: J_n, Cbar_inv_n (9), and per branch A (9), Adot (9)

#include <array>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "magfem/solver.hpp"

namespace magfem {

inline constexpr const char* kProbeCsvHeader = "# magfem-probes v1";

class ProbeCsv {
 public:
  ProbeCsv(std::ostream& os, const Problem& p) : os_(os) {
    os_ << kProbeCsvHeader << "\n" << "t,step,iterations";
    for (const auto& pr : p.probes) os_ << "," << pr.name;
    os_ << "\n";
  }

  void row(const StepReport& r) {
    std::ostringstream line;
    line << std::setprecision(17) << r.t << "," << r.step << "," << r.iterations;
    for (double v : r.probe_values) line << "," << v;
    os_ << line.str() << "\n";
    os_.flush();
  }

 private:
  std::ostream& os_;
};

namespace detail {

inline void put_tensor(std::ostream& os, const Tensor2& t) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) os << " " << t(i, j);
}

inline void get_tensor(std::istream& is, Tensor2& t) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) is >> t(i, j);
}

}  // namespace detail

inline void write_checkpoint(const Solver& s, std::ostream& os) {
  os << "magfem-checkpoint 1\n" << std::setprecision(17);
  os << "time " << s.time() << " step " << s.step() << " reference " << s.running_reference()
     << "\n";
  const auto& U = s.solution();
  os << "dofs " << U.size() << "\n";
  for (Eigen::Index i = 0; i < U.size(); ++i) os << U(i) << "\n";
  const auto& qp = s.quad_states();
  std::size_t nb = qp.empty() ? 0 : qp.front().n.size();
  for (const auto& q : qp) nb = std::max(nb, q.n.size());
  os << "points " << qp.size() << " branches " << nb << "\n";
  for (const auto& q : qp) {
    os << q.J_n << " " << q.n.size();
    detail::put_tensor(os, q.Cbar_inv_n);
    for (const auto& b : q.n) {
      detail::put_tensor(os, b.A);
      detail::put_tensor(os, b.Adot);
    }
    os << "\n";
  }
}

inline void read_checkpoint(Solver& s, std::istream& is) {
  auto fail = [](const std::string& m) { throw IoError("read_checkpoint: " + m); };
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "magfem-checkpoint" || version != 1) fail("unsupported header");
  std::string tag;
  double t = 0.0, ref = 0.0;
  int step = 0;
  is >> tag >> t;
  if (tag != "time") fail("expected 'time'");
  is >> tag >> step;
  if (tag != "step") fail("expected 'step'");
  is >> tag >> ref;
  if (tag != "reference") fail("expected 'reference'");
  long n = 0;
  is >> tag >> n;
  if (tag != "dofs" || n != s.solution().size()) fail("dof count does not match the problem");
  Eigen::VectorXd U(n);
  for (long i = 0; i < n; ++i) is >> U(i);
  std::size_t np = 0, nb = 0;
  is >> tag >> np;
  if (tag != "points" || np != s.quad_states().size()) fail("point count does not match");
  is >> tag >> nb;
  auto qp = s.quad_states();
  for (auto& q : qp) {
    std::size_t k = 0;
    is >> q.J_n >> k;
    if (k != q.n.size()) fail("branch count does not match the materials");
    detail::get_tensor(is, q.Cbar_inv_n);
    for (auto& b : q.n) {
      detail::get_tensor(is, b.A);
      detail::get_tensor(is, b.Adot);
    }
    q.np1 = q.n;
    q.Cbar_inv_np1 = q.Cbar_inv_n;
    q.J_np1 = q.J_n;
  }
  if (!is) fail("truncated file");
  s.solution() = U;
  s.quad_states() = qp;
  s.set_time(t, step);
  s.set_running_reference(ref);
}

inline void write_checkpoint_file(const Solver& s, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_checkpoint(s, os);
  if (!os) throw IoError("write failed: '" + path + "'");
}

inline void read_checkpoint_file(Solver& s, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  read_checkpoint(s, is);
}

enum class VtkCells { Lagrange27, SubHex8 };

namespace detail {

// VTK triquadratic hexahedron ordering expressed as (i, j, k) in {0,1,2}^3.
inline const std::array<std::array<int, 3>, 27>& vtk_quadratic_hex_ijk() {
  static const std::array<std::array<int, 3>, 27> t = {{
      {0, 0, 0}, {2, 0, 0}, {2, 2, 0}, {0, 2, 0}, {0, 0, 2}, {2, 0, 2}, {2, 2, 2},
      {0, 2, 2}, {1, 0, 0}, {2, 1, 0}, {1, 2, 0}, {0, 1, 0}, {1, 0, 2}, {2, 1, 2},
      {1, 2, 2}, {0, 1, 2}, {0, 0, 1}, {2, 0, 1}, {2, 2, 1}, {0, 2, 1}, {0, 1, 1},
      {2, 1, 1}, {1, 0, 1}, {1, 2, 1}, {1, 1, 0}, {1, 1, 2}, {1, 1, 1},
  }};
  return t;
}

}  // namespace detail

/// Legacy ASCII unstructured grid. Points are the deformed positions of the
/// control-point Greville locations, so there is one point per mesh node.
inline void write_vtk(const Solver& s, std::ostream& os, VtkCells cells = VtkCells::Lagrange27) {
  const auto& m = s.problem().mesh;
  const int nn = m.num_nodes(), ne = m.num_elems();
  const bool coupled = s.dofs().coupled();

  std::vector<int> owner(nn, -1), local(nn, -1);
  for (int e = 0; e < ne; ++e)
    for (int a = 0; a < 27; ++a)
      if (owner[m.elems_u[e][a]] < 0) {
        owner[m.elems_u[e][a]] = e;
        local[m.elems_u[e][a]] = a;
      }
  std::vector<Vector3> X(nn, Vector3::Zero()), u(nn, Vector3::Zero());
  std::vector<double> phi(nn, 0.0);
  for (int n = 0; n < nn; ++n) {
    if (owner[n] < 0) {
      X[n] = m.nodes[n];
      continue;
    }
    const Solver::PointLocation loc{owner[n], greville_bq2(local[n])};
    X[n] = geometry_map(m, loc.elem, loc.xi);
    const auto f = s.field_at(loc);
    u[n] = f.u;
    phi[n] = f.phi;
  }

  os << "# vtk DataFile Version 3.0\nmagfem " << s.problem().name << " t=" << s.time()
     << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(12);
  os << "POINTS " << nn << " double\n";
  for (int n = 0; n < nn; ++n) {
    const Vector3 x = X[n] + u[n];
    os << x(0) << " " << x(1) << " " << x(2) << "\n";
  }
  const auto& ord = detail::vtk_quadratic_hex_ijk();
  auto node = [&](int e, int i, int j, int k) { return m.elems_u[e][i + 3 * j + 9 * k]; };
  if (cells == VtkCells::Lagrange27) {
    os << "CELLS " << ne << " " << ne * 28 << "\n";
    for (int e = 0; e < ne; ++e) {
      os << 27;
      for (const auto& ijk : ord) os << " " << node(e, ijk[0], ijk[1], ijk[2]);
      os << "\n";
    }
    os << "CELL_TYPES " << ne << "\n";
    for (int e = 0; e < ne; ++e) os << "29\n";
  } else {
    os << "CELLS " << 8 * ne << " " << 8 * ne * 9 << "\n";
    for (int e = 0; e < ne; ++e)
      for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
          for (int i = 0; i < 2; ++i) {
            os << 8;
            for (int c = 0; c < 8; ++c) {
              const auto& ijk = ord[c];
              os << " " << node(e, i + ijk[0] / 2, j + ijk[1] / 2, k + ijk[2] / 2);
            }
            os << "\n";
          }
    os << "CELL_TYPES " << 8 * ne << "\n";
    for (int e = 0; e < 8 * ne; ++e) os << "12\n";
  }
  os << "POINT_DATA " << nn << "\nVECTORS u double\n";
  for (int n = 0; n < nn; ++n) os << u[n](0) << " " << u[n](1) << " " << u[n](2) << "\n";
  if (coupled) {
    os << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < nn; ++n) os << phi[n] << "\n";
  }
  const int nc = cells == VtkCells::Lagrange27 ? ne : 8 * ne;
  os << "CELL_DATA " << nc << "\nSCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < ne; ++e) {
    const double p = s.field_at(Solver::PointLocation{e, Vector3::Constant(0.5)}).p;
    for (int c = 0; c < (cells == VtkCells::Lagrange27 ? 1 : 8); ++c) os << p << "\n";
  }
}

inline void write_vtk_file(const Solver& s, const std::string& path,
                           VtkCells cells = VtkCells::Lagrange27) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_vtk(s, os, cells);
  if (!os) throw IoError("write failed: '" + path + "'");
}

}  // namespace magfem
