#pragma once

// BQ2/BQ1 hexahedral meshes built from axis-aligned boxes, with named node and
// face sets, plus a plain-text exchange format:
//
//   # magfem-mesh v1
//   nodes <N>
//   <x> <y> <z>                      (N lines)
//   elements <E>
//   <region> <n0> ... <n26>          (E lines, BQ2 local order i + 3j + 9k)
//   nodeset <name> <count> <ids...>
//   faceset <name> <count> <elem face> <elem face> ...
//
// BQ1 connectivity is implied by the eight corners of each BQ2 element.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "magfem/bezier.hpp"
#include "magfem/errors.hpp"
#include "magfem/tensor.hpp"

namespace magfem {

struct FaceRef {
  int elem = 0;
  int face = 0;  ///< parent face id, see face_nodes_bq2
  bool operator==(const FaceRef&) const = default;
  auto operator<=>(const FaceRef&) const = default;
};

struct MixedMesh {
  std::vector<Vector3> nodes;
  std::vector<std::array<int, 27>> elems_u;
  std::vector<std::array<int, 8>> elems_p;
  std::vector<int> region;
  std::map<std::string, std::vector<int>> node_sets;
  std::map<std::string, std::vector<FaceRef>> face_sets;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elems() const { return static_cast<int>(elems_u.size()); }

  const std::vector<int>& node_set(const std::string& name) const {
    auto it = node_sets.find(name);
    if (it == node_sets.end()) throw ConfigError("mesh: unknown node set '" + name + "'");
    return it->second;
  }
  const std::vector<FaceRef>& face_set(const std::string& name) const {
    auto it = face_sets.find(name);
    if (it == face_sets.end()) throw ConfigError("mesh: unknown face set '" + name + "'");
    return it->second;
  }

  /// Nodes carrying a pressure unknown, ascending.
  std::vector<int> pressure_nodes() const {
    std::set<int> s;
    for (const auto& e : elems_p) s.insert(e.begin(), e.end());
    return {s.begin(), s.end()};
  }

  std::pair<Vector3, Vector3> bounding_box() const {
    Vector3 lo = Vector3::Constant(1e300), hi = Vector3::Constant(-1e300);
    for (const auto& x : nodes) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    return {lo, hi};
  }
};

inline std::array<int, 8> corners_of(const std::array<int, 27>& e) {
  std::array<int, 8> c{};
  for (int k = 0; k < 8; ++k) c[k] = e[corner_of(k)];
  return c;
}

/// Boundary faces: faces not shared by two elements.
inline std::vector<FaceRef> boundary_faces(const MixedMesh& m) {
  std::map<std::array<int, 9>, std::vector<FaceRef>> seen;
  for (int e = 0; e < m.num_elems(); ++e)
    for (int f = 0; f < 6; ++f) {
      std::array<int, 9> key{};
      const auto loc = face_nodes_bq2(f);
      for (int a = 0; a < 9; ++a) key[a] = m.elems_u[e][loc[a]];
      std::sort(key.begin(), key.end());
      seen[key].push_back({e, f});
    }
  std::vector<FaceRef> out;
  for (const auto& [key, refs] : seen)
    if (refs.size() == 1) out.push_back(refs[0]);
  std::sort(out.begin(), out.end());
  return out;
}

inline void add_node_set(MixedMesh& m, const std::string& name,
                         const std::function<bool(const Vector3&)>& pred) {
  std::vector<int> ids;
  for (int n = 0; n < m.num_nodes(); ++n)
    if (pred(m.nodes[n])) ids.push_back(n);
  m.node_sets[name] = std::move(ids);
}

/// Boundary faces whose nine control points all satisfy `pred`.
inline void add_face_set(MixedMesh& m, const std::string& name,
                         const std::function<bool(const Vector3&)>& pred) {
  std::vector<FaceRef> faces;
  for (const auto& fr : boundary_faces(m)) {
    const auto loc = face_nodes_bq2(fr.face);
    bool all = true;
    for (int a : loc) all = all && pred(m.nodes[m.elems_u[fr.elem][a]]);
    if (all) faces.push_back(fr);
  }
  m.face_sets[name] = std::move(faces);
}

/// Node and face sets xmin, xmax, ymin, ymax, zmin, zmax on the bounding box.
inline void add_bounding_box_sets(MixedMesh& m) {
  const auto [lo, hi] = m.bounding_box();
  const double tol = 1e-9 * std::max(1.0, (hi - lo).maxCoeff());
  const char* axes = "xyz";
  for (int d = 0; d < 3; ++d) {
    const double a = lo(d), b = hi(d);
    const std::string base(1, axes[d]);
    auto at_lo = [=](const Vector3& x) { return std::abs(x(d) - a) <= tol; };
    auto at_hi = [=](const Vector3& x) { return std::abs(x(d) - b) <= tol; };
    add_node_set(m, base + "min", at_lo);
    add_node_set(m, base + "max", at_hi);
    add_face_set(m, base + "min", at_lo);
    add_face_set(m, base + "max", at_hi);
  }
}

/// Assembles boxes into one mesh, merging coincident control points.
class MeshBuilder {
 public:
  explicit MeshBuilder(double merge_tol = 1e-9) : tol_(merge_tol) {}

  /// Adds an axis-aligned box [origin, origin + extent] split into
  /// `divisions` BQ2 elements, tagged with `region`.
  MeshBuilder& add_box(const Vector3& origin, const Vector3& extent,
                       const std::array<int, 3>& divisions, int region = 0) {
    for (int d = 0; d < 3; ++d) {
      if (divisions[d] < 1) throw ConfigError("mesh: divisions must be >= 1");
      if (!(extent(d) > 0.0)) throw ConfigError("mesh: box extents must be positive");
    }
    const int nx = divisions[0], ny = divisions[1], nz = divisions[2];
    const int gx = 2 * nx + 1, gy = 2 * ny + 1, gz = 2 * nz + 1;
    std::vector<int> ids(static_cast<std::size_t>(gx) * gy * gz);
    for (int k = 0; k < gz; ++k)
      for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i) {
          const Vector3 x = origin + Vector3(extent(0) * i / (gx - 1), extent(1) * j / (gy - 1),
                                             extent(2) * k / (gz - 1));
          ids[i + gx * (j + gy * k)] = node_id(x);
        }
    for (int ek = 0; ek < nz; ++ek)
      for (int ej = 0; ej < ny; ++ej)
        for (int ei = 0; ei < nx; ++ei) {
          std::array<int, 27> conn{};
          for (int c = 0; c < 27; ++c) {
            const int i = 2 * ei + c % 3, j = 2 * ej + (c / 3) % 3, k = 2 * ek + c / 9;
            conn[c] = ids[i + gx * (j + gy * k)];
          }
          mesh_.elems_u.push_back(conn);
          mesh_.elems_p.push_back(corners_of(conn));
          mesh_.region.push_back(region);
        }
    return *this;
  }

  MixedMesh build() {
    MixedMesh m = mesh_;
    add_bounding_box_sets(m);
    return m;
  }

 private:
  int node_id(const Vector3& x) {
    const std::array<long long, 3> key = {std::llround(x(0) / tol_), std::llround(x(1) / tol_),
                                          std::llround(x(2) / tol_)};
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(mesh_.nodes.size());
    mesh_.nodes.push_back(x);
    index_.emplace(key, id);
    return id;
  }

  double tol_;
  MixedMesh mesh_;
  std::map<std::array<long long, 3>, int> index_;
};

inline MixedMesh structured_hex_mesh(const Vector3& extent, const std::array<int, 3>& divisions,
                                     const Vector3& origin = Vector3::Zero()) {
  return MeshBuilder().add_box(origin, extent, divisions).build();
}

/// Reference position at parametric point xi of element e.
inline Vector3 geometry_map(const MixedMesh& m, int e, const Vector3& xi) {
  const auto s = shape_bq2(xi);
  Vector3 x = Vector3::Zero();
  for (int a = 0; a < 27; ++a) x += s.N(a) * m.nodes[m.elems_u[e][a]];
  return x;
}

/// Throws NonPositiveJacobian if the geometry map degenerates at any point of
/// a 3x3x3 rule in any element.
inline void check_geometry(const MixedMesh& m) {
  const auto rule = gauss_rule(3);
  for (int e = 0; e < m.num_elems(); ++e)
    for (const auto& q : rule) {
      const auto s = shape_bq2(q.xi);
      Tensor2 Jac = Tensor2::Zero();
      for (int a = 0; a < 27; ++a) Jac += m.nodes[m.elems_u[e][a]] * s.dN.row(a);
      if (!(det3(Jac) > 0.0)) {
        std::ostringstream msg;
        msg << "mesh: non-positive geometry Jacobian in element " << e;
        throw NonPositiveJacobian(msg.str());
      }
    }
}

inline void write_mesh(const MixedMesh& m, std::ostream& os) {
  os << "# magfem-mesh v1\n" << std::setprecision(17);
  os << "nodes " << m.num_nodes() << "\n";
  for (const auto& x : m.nodes) os << x(0) << " " << x(1) << " " << x(2) << "\n";
  os << "elements " << m.num_elems() << "\n";
  for (int e = 0; e < m.num_elems(); ++e) {
    os << m.region[e];
    for (int n : m.elems_u[e]) os << " " << n;
    os << "\n";
  }
  for (const auto& [name, ids] : m.node_sets) {
    os << "nodeset " << name << " " << ids.size();
    for (int n : ids) os << " " << n;
    os << "\n";
  }
  for (const auto& [name, faces] : m.face_sets) {
    os << "faceset " << name << " " << faces.size();
    for (const auto& f : faces) os << " " << f.elem << " " << f.face;
    os << "\n";
  }
}

inline MixedMesh read_mesh(std::istream& is) {
  auto fail = [](const std::string& msg) -> MixedMesh { throw IoError("read_mesh: " + msg); };
  std::string line;
  if (!std::getline(is, line) || line.rfind("# magfem-mesh v1", 0) != 0)
    return fail("missing '# magfem-mesh v1' header");
  MixedMesh m;
  std::string tag;
  while (is >> tag) {
    if (tag == "nodes") {
      int n = 0;
      is >> n;
      m.nodes.resize(n);
      for (auto& x : m.nodes) is >> x(0) >> x(1) >> x(2);
    } else if (tag == "elements") {
      int n = 0;
      is >> n;
      m.elems_u.resize(n);
      m.region.resize(n);
      for (int e = 0; e < n; ++e) {
        is >> m.region[e];
        for (int& id : m.elems_u[e]) is >> id;
        m.elems_p.push_back(corners_of(m.elems_u[e]));
      }
    } else if (tag == "nodeset") {
      std::string name;
      std::size_t n = 0;
      is >> name >> n;
      std::vector<int> ids(n);
      for (int& id : ids) is >> id;
      m.node_sets[name] = std::move(ids);
    } else if (tag == "faceset") {
      std::string name;
      std::size_t n = 0;
      is >> name >> n;
      std::vector<FaceRef> faces(n);
      for (auto& f : faces) is >> f.elem >> f.face;
      m.face_sets[name] = std::move(faces);
    } else {
      return fail("unknown record '" + tag + "'");
    }
    if (!is) return fail("truncated record '" + tag + "'");
  }
  for (const auto& conn : m.elems_u)
    for (int id : conn)
      if (id < 0 || id >= m.num_nodes()) return fail("node index out of range");
  return m;
}

inline void write_mesh_file(const MixedMesh& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_mesh(m, os);
  if (!os) throw IoError("write failed: '" + path + "'");
}

inline MixedMesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_mesh(is);
}

}  // namespace magfem
