#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "magfem/io.hpp"
#include "magfem/scenarios.hpp"

using namespace magfem;

namespace {

Problem small_soft() {
  auto p = scenario_params("cube_soft_gent");
  p["steps"] = 2;
  return build_cube_soft_gent(p, 0.3);
}

int count_lines_after(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (line.rfind(key, 0) == 0) return std::stoi(line.substr(key.size()));
  return -1;
}

}  // namespace

TEST(Vtk, HeaderAndCounts) {
  Solver s(small_soft());
  std::ostringstream os;
  write_vtk(s, os);
  const std::string v = os.str();
  EXPECT_EQ(v.rfind("# vtk DataFile Version", 0), 0u);
  EXPECT_EQ(count_lines_after(v, "POINTS "), s.problem().mesh.num_nodes());
  EXPECT_EQ(count_lines_after(v, "CELLS "), 1);
  EXPECT_NE(v.find("SCALARS phi"), std::string::npos);
  std::ostringstream sub;
  write_vtk(s, sub, VtkCells::SubHex8);
  EXPECT_EQ(count_lines_after(sub.str(), "CELLS "), 8);
}

TEST(Vtk, UndeformedPointsAreNodes) {
  auto p = scenario_params("beam_hard");
  Solver s(build_beam_hard(p));
  std::ostringstream os;
  write_vtk(s, os);
  std::istringstream is(os.str());
  std::string line;
  while (std::getline(is, line) && line.rfind("POINTS", 0) != 0) {
  }
  for (const auto& X : s.problem().mesh.nodes) {
    Vector3 x;
    is >> x(0) >> x(1) >> x(2);
    EXPECT_LT((x - X).norm(), 1e-9);
  }
}

TEST(Vtk, BitStable) {
  Solver a(small_soft()), b(small_soft());
  a.run();
  b.run();
  std::ostringstream sa, sb;
  write_vtk(a, sa);
  write_vtk(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Vtk, BadPathThrows) {
  Solver s(small_soft());
  EXPECT_THROW(write_vtk_file(s, "/nonexistent/dir/out.vtk"), IoError);
}

TEST(ProbeCsv, HeaderAndRows) {
  Solver s(small_soft());
  std::ostringstream os;
  ProbeCsv csv(os, s.problem());
  s.run([&](const StepReport& r) { csv.row(r); });
  std::istringstream is(os.str());
  std::string l1, l2;
  std::getline(is, l1);
  std::getline(is, l2);
  EXPECT_EQ(l1, kProbeCsvHeader);
  EXPECT_EQ(l2, "t,step,iterations,u_x,u_y,u_z");
  int rows = 0;
  for (std::string l; std::getline(is, l);) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(MeshFile, RoundTripThroughDisk) {
  const auto m = structured_hex_mesh(Vector3(2, 1, 1), {2, 1, 1});
  const std::string path = ::testing::TempDir() + "/magfem_mesh.txt";
  write_mesh_file(m, path);
  const auto r = read_mesh_file(path);
  EXPECT_EQ(r.elems_u, m.elems_u);
  EXPECT_THROW(read_mesh_file("/nonexistent/mesh.txt"), IoError);
}
