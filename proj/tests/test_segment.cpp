#include <cmath>
#include <numbers>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "sphereflow/error.hpp"
#include "sphereflow/primitives.hpp"
#include "sphereflow/segment.hpp"
#include "test_util.hpp"

using namespace sphereflow;
namespace prim = sphereflow::primitives;
constexpr double kPi = std::numbers::pi;

namespace {

// |correlation| between f and its best affine fit in (x, y, z).
double linear_fit_correlation(const HalfedgeMesh& m, const std::vector<double>& f) {
  const int n = m.num_vertices();
  Eigen::MatrixXd A(n, 4);
  Eigen::VectorXd b(n);
  for (int v = 0; v < n; ++v) {
    A.row(v) << 1.0, m.position(v).x(), m.position(v).y(), m.position(v).z();
    b[v] = f[v];
  }
  Eigen::VectorXd fit = A * A.colPivHouseholderQr().solve(b);
  Eigen::VectorXd x = b.array() - b.mean(), y = fit.array() - fit.mean();
  return std::abs(x.dot(y)) / (x.norm() * y.norm());
}

int components_without(const HalfedgeMesh& m, const std::vector<char>& removed) {
  std::vector<int> comp(m.num_faces(), -1);
  int k = 0;
  for (int s = 0; s < m.num_faces(); ++s) {
    if (removed[s] || comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = k;
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      for (int c = 0; c < 3; ++c) {
        int t = m.twin(3 * f + c);
        if (t < 0) continue;
        int g = HalfedgeMesh::face(t);
        if (!removed[g] && comp[g] < 0) comp[g] = k, stack.push_back(g);
      }
    }
    ++k;
  }
  return k;
}

std::vector<double> coordinate(const HalfedgeMesh& m, int axis, double offset = 0) {
  std::vector<double> f(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) f[v] = m.position(v)[axis] + offset;
  return f;
}

}  // namespace

TEST_CASE("first eigenfunction of the round sphere") {
  auto m = prim::icosphere(22);
  REQUIRE(m.num_faces() == 9680);
  auto ef = first_eigenfunction(m);
  CHECK(ef.eigenvalue == doctest::Approx(2.0).epsilon(0.05));
  CHECK(ef.residual < 1e-8);
  auto w = vertex_area_weights(m);
  double mean = 0, norm = 0;
  for (int v = 0; v < m.num_vertices(); ++v) mean += w[v] * ef.values[v], norm += w[v] * ef.values[v] * ef.values[v];
  CHECK(std::abs(mean) < 1e-8);
  CHECK(std::abs(norm - 1) < 1e-8);
  CHECK(linear_fit_correlation(m, ef.values) > 0.99);

  auto coarse = first_eigenfunction(prim::icosphere(8));
  CHECK(std::abs(ef.eigenvalue - 2) < std::abs(coarse.eigenvalue - 2));
  CHECK(coarse.eigenvalue > 1e-10);
}

TEST_CASE("eigenfunction of the ellipsoid follows the long axis") {
  auto m = prim::ellipsoid(10, 1, 1, 2);
  auto ef = first_eigenfunction(m);
  auto z = coordinate(m, 2);
  Eigen::VectorXd a = Eigen::Map<Eigen::VectorXd>(ef.values.data(), ef.values.size());
  Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(z.data(), z.size());
  CHECK(std::abs(a.normalized().dot(b.normalized())) > 0.95);
}

TEST_CASE("eigen solver preconditions") {
  CHECK_THROWS_AS(first_eigenfunction(prim::unit_disk(3)), Error);
}

TEST_CASE("equator loop of the coordinate function") {
  auto m = prim::icosphere(22);
  auto loop = zero_level_loop(m, coordinate(m, 2, 1e-3));
  CHECK(loop.length == doctest::Approx(2 * kPi).epsilon(0.02));
  for (const auto& p : loop.points) {
    CHECK(p.t > 0);
    CHECK(p.t < 1);
    CHECK(std::abs(p.position.z() + 1e-3) < 0.01);
  }
  std::vector<double> positive(m.num_vertices(), 1.0);
  try {
    zero_level_loop(m, positive);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no zero level set") != std::string::npos);
  }
}

TEST_CASE("removing crossed faces leaves two components") {
  auto m = prim::lumpy_sphere(10);
  auto ef = first_eigenfunction(m);
  auto loop = zero_level_loop(m, ef.values);
  std::vector<char> removed(m.num_faces(), 0);
  for (const auto& p : loop.points) {
    int h = m.edge_halfedge(p.edge);
    removed[HalfedgeMesh::face(h)] = 1;
    removed[HalfedgeMesh::face(m.twin(h))] = 1;
  }
  CHECK(components_without(m, removed) == 2);
}

TEST_CASE("dumbbell: the longest loop is selected") {
  auto m = prim::dumbbell(14);
  std::vector<double> f(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) {
    double z = m.position(v).z();
    f[v] = (z + 0.3) * (z - 0.75);  // a short loop at the neck, a long one on the upper lobe
  }
  auto loops = zero_level_loops(m, f);
  REQUIRE(loops.size() == 2);
  CHECK(loops[0].length > loops[1].length);
  auto chosen = zero_level_loop(m, f);
  CHECK(chosen.length == loops[0].length);
  auto seg = split_mesh(m, f, chosen);
  CHECK(seg.disks[0].mesh.euler_characteristic() == 1);
  CHECK(seg.disks[1].mesh.euler_characteristic() == 1);
}

TEST_CASE("split at the equator") {
  auto m = prim::icosphere(22);
  auto f = coordinate(m, 2, 1e-3);
  auto loop = zero_level_loop(m, f);
  auto seg = split_mesh(m, f, loop);
  const auto& d0 = seg.disks[0].mesh;
  const auto& d1 = seg.disks[1].mesh;
  CHECK(seg.area_ratio == doctest::Approx(1.0).epsilon(0.1));
  CHECK(seg.warnings.empty());
  CHECK(d0.euler_characteristic() == 1);
  CHECK(d1.euler_characteristic() == 1);
  auto b0 = d0.boundary_loops()[0], b1 = d1.boundary_loops()[0];
  CHECK(b0.size() == b1.size());
  CHECK(seg.seam.size() == loop.points.size());
  CHECK(std::abs(total_area(d0) + total_area(d1) - total_area(m)) < 1e-9 * total_area(m));
  // disks[0] is the f > 0 side.
  for (int v : seg.disks[0].to_split)
    if (v < m.num_vertices()) CHECK(f[v] > 0);
  // disks[1] visits the seam in reverse.
  std::vector<int> other;
  for (int v : b1) other.push_back(seg.disks[1].to_split[v]);
  auto it = std::find(other.begin(), other.end(), seg.seam[0]);
  REQUIRE(it != other.end());
  std::rotate(other.begin(), it, other.end());
  std::reverse(other.begin() + 1, other.end());
  CHECK(other == seg.seam);
}

TEST_CASE("short seams are refined to four vertices") {
  auto tet = prim::tetrahedron();
  std::vector<double> f{-1, 0.2, 0.2, 0.2};
  auto loop = zero_level_loop(tet, f);
  CHECK(loop.points.size() == 3);
  auto seg = split_mesh(tet, f, loop);
  CHECK(seg.seam.size() >= 4);
  CHECK(seg.disks[0].mesh.euler_characteristic() == 1);
  CHECK(seg.disks[1].mesh.euler_characteristic() == 1);
  CHECK(std::abs(total_area(seg.disks[0].mesh) + total_area(seg.disks[1].mesh) - total_area(tet)) < 1e-12);
}

TEST_CASE("unbalanced cuts warn or fail") {
  auto m = prim::icosphere(10);
  auto warn = split_mesh(m, coordinate(m, 2, -0.4), zero_level_loop(m, coordinate(m, 2, -0.4)));
  CHECK(warn.warnings.size() == 1);
  auto f = coordinate(m, 2, -0.8);
  CHECK_THROWS_AS(split_mesh(m, f, zero_level_loop(m, f)), Error);
}

TEST_CASE("segment_mesh pipeline and exports") {
  auto m = prim::ellipsoid(8, 1, 1, 2);
  EigenFunction ef;
  CutLoop loop;
  auto seg = segment_mesh(m, &ef, &loop);
  CHECK(seg.area_ratio == doctest::Approx(1.0).epsilon(0.05));
  auto dir = testutil::temp_dir("segment");
  write_scalar_csv((dir / "f.csv").string(), ef.values);
  std::ifstream in(dir / "f.csv");
  int lines = 0;
  for (std::string s; std::getline(in, s);) ++lines;
  CHECK(lines == m.num_vertices() + 1);
}
