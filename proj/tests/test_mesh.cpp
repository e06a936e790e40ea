#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sphereflow/error.hpp"
#include "sphereflow/mesh.hpp"
#include "sphereflow/mesh_io.hpp"
#include "sphereflow/primitives.hpp"
#include "test_util.hpp"

using namespace sphereflow;
namespace prim = sphereflow::primitives;
constexpr double kPi = std::numbers::pi;

namespace {

double residual(const HalfedgeMesh& m) {
  auto metric = euclidean_metric(m);
  return gauss_bonnet_residual(m, vertex_curvature(m, corner_angles(m, metric)));
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("halfedge connectivity invariants") {
  for (const HalfedgeMesh& m : {prim::icosphere(3), prim::unit_disk(4), prim::cylinder(1, 1, 8, 3)}) {
    for (int h = 0; h < m.num_halfedges(); ++h) {
      CHECK(HalfedgeMesh::next(HalfedgeMesh::next(HalfedgeMesh::next(h))) == h);
      int t = m.twin(h);
      if (t >= 0) {
        CHECK(m.twin(t) == h);
        CHECK(m.origin(t) == m.target(h));
        CHECK(m.target(t) == m.origin(h));
        CHECK(m.edge(t) == m.edge(h));
      }
    }
  }
}

TEST_CASE("tetrahedron counts") {
  auto m = prim::tetrahedron();
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_edges() == 6);
  CHECK(m.num_faces() == 4);
  CHECK(m.is_closed());
  CHECK(m.euler_characteristic() == 2);
}

TEST_CASE("icosphere sizes") {
  for (int nu : {1, 2, 8}) {
    auto m = prim::icosphere(nu);
    CHECK(m.num_faces() == 20 * nu * nu);
    CHECK(m.num_vertices() == 10 * nu * nu + 2);
    CHECK(m.euler_characteristic() == 2);
  }
  CHECK(prim::unit_disk(20).num_faces() == 2400);
  CHECK(prim::unit_disk(40).num_faces() == 9600);
  CHECK(prim::unit_disk(5).euler_characteristic() == 1);
  CHECK(prim::sphere_band(6, 0.7).boundary_loops().size() == 2);
}

TEST_CASE("load rejects invalid input") {
  auto dir = testutil::temp_dir("mesh_load");
  write_text(dir / "tet.obj",
             "v 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nf 1 2 3\nf 1 4 2\nf 1 3 4\nf 2 4 3\n");
  auto tet = load_mesh((dir / "tet.obj").string());
  CHECK(tet.num_vertices() == 4);
  CHECK(tet.num_edges() == 6);
  CHECK(tet.num_faces() == 4);

  write_text(dir / "quad.off", "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  try {
    load_mesh((dir / "quad.off").string());
    FAIL("quad accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Topology);
    CHECK(std::string(e.what()).find("non-triangular face") != std::string::npos);
  }

  write_text(dir / "fin.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 2 1 4\nf 1 2 5\n");
  try {
    load_mesh((dir / "fin.obj").string());
    FAIL("non-manifold accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("non-manifold") != std::string::npos);
  }

  write_text(dir / "flip.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 1 2 4\n");
  CHECK(kind_of([&] { load_mesh((dir / "flip.obj").string()); }) == ErrorKind::Topology);
  CHECK(kind_of([&] { load_mesh((dir / "missing.obj").string()); }) == ErrorKind::Io);
}

TEST_CASE("write/load round trip at 17 digits") {
  auto dir = testutil::temp_dir("mesh_io");
  auto m = prim::lumpy_sphere(4);
  for (const char* name : {"a.obj", "a.off"}) {
    auto path = (dir / name).string();
    write_mesh(path, m.positions(), m.faces());
    auto back = load_mesh(path);
    REQUIRE(back.num_vertices() == m.num_vertices());
    CHECK(back.faces() == m.faces());
    for (int v = 0; v < m.num_vertices(); ++v) CHECK(back.position(v) == m.position(v));
  }
  std::vector<Vec2> planar{{0.1, 0.2}, {1.0 / 3.0, 0}, {0, 1}};
  auto path = (dir / "p.obj").string();
  write_mesh(path, planar, std::vector<Face>{{0, 1, 2}});
  auto back = load_mesh(path);
  CHECK(back.position(1).x() == 1.0 / 3.0);
  CHECK(back.position(1).z() == 0.0);
}

TEST_CASE("corner angles") {
  auto eq = HalfedgeMesh::build(3, {{0, 1, 2}});
  DiscreteMetric l{{1, 1, 1}};
  auto a = corner_angles(eq, l);
  for (double x : a.angles) CHECK(x == doctest::Approx(kPi / 3).epsilon(1e-14));

  CHECK(angle_opposite(5, 3, 4) == doctest::Approx(kPi / 2).epsilon(1e-14));
  DiscreteMetric bad{{1, 1, 2}};
  CHECK(kind_of([&] { corner_angles(eq, bad); }) == ErrorKind::Geometry);

  auto m = prim::lumpy_sphere(5);
  auto ang = corner_angles(m, euclidean_metric(m));
  for (int f = 0; f < m.num_faces(); ++f) {
    double s = ang[3 * f] + ang[3 * f + 1] + ang[3 * f + 2];
    CHECK(std::abs(s - kPi) < 1e-12);
    for (int c = 0; c < 3; ++c) {
      const Face& fv = m.face_vertices(f);
      double oracle = testutil::acos_angle(m.position(fv[c]), m.position(fv[(c + 1) % 3]),
                                           m.position(fv[(c + 2) % 3]));
      CHECK(std::abs(ang[3 * f + c] - oracle) < 1e-10);
    }
  }
}

TEST_CASE("vertex curvature examples") {
  auto tet = prim::tetrahedron();
  auto K = vertex_curvature(tet, corner_angles(tet, euclidean_metric(tet)));
  for (double k : K.values) CHECK(k == doctest::Approx(kPi).epsilon(1e-14));

  auto grid = prim::equilateral_grid(4, 4);
  auto Kg = vertex_curvature(grid, corner_angles(grid, euclidean_metric(grid)));
  int interior = 0;
  for (int v = 0; v < grid.num_vertices(); ++v) {
    if (grid.is_boundary_vertex(v)) continue;
    CHECK(grid.vertex_neighbors(v).size() == 6);
    CHECK(std::abs(Kg[v]) < 1e-12);
    ++interior;
  }
  CHECK(interior > 0);

  auto sq = prim::square_grid(3);
  auto Ks = vertex_curvature(sq, corner_angles(sq, euclidean_metric(sq)));
  // Vertex (1,0) has a single right-angle corner.
  CHECK(Ks[3] == doctest::Approx(kPi / 2).epsilon(1e-14));
}

TEST_CASE("Gauss-Bonnet") {
  CHECK(std::abs(residual(prim::tetrahedron())) < 1e-9);
  CHECK(std::abs(residual(prim::octahedron())) < 1e-9);
  auto oct = prim::octahedron();
  auto K = vertex_curvature(oct, corner_angles(oct, euclidean_metric(oct)));
  for (double k : K.values) CHECK(k == doctest::Approx(2 * kPi / 3).epsilon(1e-14));
  CHECK(std::abs(residual(HalfedgeMesh::build(3, {{0, 1, 2}}, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}))) < 1e-12);
  for (const auto& m : {prim::icosphere(5), prim::lumpy_sphere(6), prim::unit_disk(9),
                        prim::sphere_band(7, 0.6), prim::cylinder(2, 1, 12, 5)}) {
    CHECK(std::abs(residual(m)) < 1e-9);
  }
}

TEST_CASE("Delaunay test and diagonal switch on the thin quad") {
  auto q = testutil::quad({0, 0, 0}, {2, 0, 0}, {1, 0.1, 0}, {1, -0.1, 0});
  int e = testutil::shared_edge(q, 0, 1);
  double apex = testutil::acos_angle({1, 0.1, 0}, {0, 0, 0}, {2, 0, 0});
  CHECK(apex * 180 / kPi == doctest::Approx(168.58).epsilon(1e-3));
  auto metric = euclidean_metric(q);
  CHECK_FALSE(is_delaunay(q, metric, e));
  CHECK(flipped_diagonal_length(q, metric, e) == doctest::Approx(0.2).epsilon(1e-12));

  auto before = metric;
  auto flipped = q;
  diagonal_switch(flipped, metric, e);
  auto ev = flipped.edge_vertices(e);
  CHECK(std::min(ev[0], ev[1]) == 2);
  CHECK(std::max(ev[0], ev[1]) == 3);
  CHECK(metric[e] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(is_delaunay(flipped, metric, e));
  diagonal_switch(flipped, metric, e);
  for (int i = 0; i < q.num_edges(); ++i) CHECK(std::abs(metric[i] - before[i]) < 1e-12);

  auto tall = testutil::quad({0, 0, 0}, {2, 0, 0}, {1, 3, 0}, {1, -3, 0});
  CHECK(is_delaunay(tall, euclidean_metric(tall), testutil::shared_edge(tall, 0, 1)));

  auto thin = q;
  auto m2 = euclidean_metric(thin);
  CHECK(make_delaunay(thin, m2) == 1);
  CHECK(make_delaunay(thin, m2) == 0);

  auto boundary = testutil::shared_edge(q, 0, 2);
  CHECK(kind_of([&] { is_delaunay(q, euclidean_metric(q), boundary); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("square diagonal is a cocircular Delaunay edge and has zero weight") {
  auto sq = testutil::quad({0, 0, 0}, {1, 1, 0}, {0, 1, 0}, {1, 0, 0});
  int e = testutil::shared_edge(sq, 0, 1);
  auto metric = euclidean_metric(sq);
  CHECK(is_delaunay(sq, metric, e));
  auto w = cotan_weights(sq, corner_angles(sq, metric));
  CHECK(std::abs(w[e]) < 1e-15);
}

TEST_CASE("non-convex quad cannot be flipped") {
  auto dart = testutil::quad({0, 0, 0}, {2, 0, 0}, {3, 1, 0}, {3, -0.5, 0});
  auto metric = euclidean_metric(dart);
  CHECK(kind_of([&] { flipped_diagonal_length(dart, metric, testutil::shared_edge(dart, 0, 1)); }) ==
        ErrorKind::Geometry);
}

TEST_CASE("make_delaunay on a jittered flat triangulation of 100 points") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  auto grid = prim::square_grid(9);
  auto p = grid.positions();
  for (int v = 0; v < grid.num_vertices(); ++v) {
    if (grid.is_boundary_vertex(v)) continue;
    p[v] += Vec3(jitter(rng), jitter(rng), 0) / 9.0;
  }
  grid.set_positions(p);
  auto metric = euclidean_metric(grid);
  int flips = make_delaunay(grid, metric);
  CHECK(flips > 0);
  for (int e = 0; e < grid.num_edges(); ++e)
    if (!grid.is_boundary_edge(e)) CHECK(is_delaunay(grid, metric, e));
  CHECK(make_delaunay(grid, metric) == 0);
  // Flat retriangulation keeps every vertex flat and the total unchanged.
  auto K = vertex_curvature(grid, corner_angles(grid, metric));
  for (int v = 0; v < grid.num_vertices(); ++v)
    if (!grid.is_boundary_vertex(v)) CHECK(std::abs(K[v]) < 1e-10);
  CHECK(std::abs(gauss_bonnet_residual(grid, K)) < 1e-9);
}

TEST_CASE("cotan Laplacian") {
  auto grid = prim::equilateral_grid(3, 3);
  auto ang = corner_angles(grid, euclidean_metric(grid));
  auto w = cotan_weights(grid, ang);
  for (int e = 0; e < grid.num_edges(); ++e) {
    if (grid.is_boundary_edge(e)) continue;
    CHECK(w[e] == doctest::Approx(2 / std::sqrt(3.0)).epsilon(1e-12));
  }
  auto m = prim::lumpy_sphere(4);
  SparseMatrix L = cotan_laplacian(m, corner_angles(m, euclidean_metric(m)));
  Eigen::MatrixXd D(L);
  CHECK((D - D.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((D.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
  // Non-adjacent pair.
  auto nb = m.vertex_neighbors(0);
  for (int v = 1; v < m.num_vertices(); ++v)
    if (std::find(nb.begin(), nb.end(), v) == nb.end()) {
      CHECK(D(0, v) == 0.0);
      break;
    }
}

TEST_CASE("vertex area weights") {
  auto tet = prim::tetrahedron(1.0);
  for (double w : vertex_area_weights(tet)) CHECK(w == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-12));
  auto grid = prim::equilateral_grid(4, 4);
  auto wg = vertex_area_weights(grid);
  for (int v = 0; v < grid.num_vertices(); ++v)
    if (!grid.is_boundary_vertex(v)) CHECK(wg[v] == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
  auto m = prim::lumpy_sphere(6);
  auto wm = vertex_area_weights(m);
  double s = 0;
  for (double x : wm) s += x;
  CHECK(std::abs(s - total_area(m)) < 1e-12 * total_area(m));
}

TEST_CASE("boundary loops follow face orientation") {
  auto d = prim::unit_disk(3);
  auto loops = d.boundary_loops();
  REQUIRE(loops.size() == 1);
  CHECK(loops[0].size() == 18);
  // Counter-clockwise: positive signed area.
  double area = 0;
  const auto& L = loops[0];
  for (std::size_t i = 0; i < L.size(); ++i) {
    Vec3 a = d.position(L[i]), b = d.position(L[(i + 1) % L.size()]);
    area += a.x() * b.y() - a.y() * b.x();
  }
  CHECK(area > 0);
}
