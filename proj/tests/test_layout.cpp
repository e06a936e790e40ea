#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sphereflow/error.hpp"
#include "sphereflow/layout.hpp"
#include "sphereflow/primitives.hpp"

using namespace sphereflow;
namespace prim = sphereflow::primitives;
constexpr double kPi = std::numbers::pi;

namespace {

double max_radius_deviation(const PlanarEmbedding& emb, const std::vector<int>& loop, double r) {
  double d = 0;
  for (int v : loop) d = std::max(d, std::abs(std::abs(emb.positions[v]) - r) / r);
  return d;
}

// Mean |log(image angle / source angle)| over all corners.
double mean_angle_log_ratio(const HalfedgeMesh& m, const PlanarEmbedding& emb) {
  auto src = corner_angles(m, euclidean_metric(m));
  std::vector<Vec3> p(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) p[v] = Vec3(emb.positions[v].real(), emb.positions[v].imag(), 0);
  auto img_mesh = m;
  img_mesh.set_positions(p);
  auto img = corner_angles(img_mesh, euclidean_metric(img_mesh));
  double s = 0;
  for (int h = 0; h < m.num_halfedges(); ++h) s += std::abs(std::log(img[h] / src[h]));
  return s / m.num_halfedges();
}

}  // namespace

TEST_CASE("layout of a 3-4-5 triangle") {
  auto m = HalfedgeMesh::build(3, {{0, 1, 2}});
  DiscreteMetric l;
  l.lengths.resize(3);
  for (int e = 0; e < 3; ++e) {
    auto v = m.edge_vertices(e);
    int a = std::min(v[0], v[1]), b = std::max(v[0], v[1]);
    l.lengths[e] = (a == 0 && b == 1) ? 3.0 : (a == 0 && b == 2) ? 4.0 : 5.0;
  }
  auto emb = layout_flat_metric(m, l);
  CHECK(std::abs(emb.positions[0]) < 1e-15);
  CHECK(std::abs(emb.positions[1] - Complex(3, 0)) < 1e-14);
  CHECK(std::abs(emb.positions[2] - Complex(0, 4)) < 1e-14);
}

TEST_CASE("layout of a flat grid is congruent") {
  auto g = prim::square_grid(8);
  auto emb = layout_flat_metric(g, euclidean_metric(g));
  for (int i = 0; i < g.num_vertices(); i += 3)
    for (int j = i + 1; j < g.num_vertices(); j += 5) {
      double d3 = (g.position(i) - g.position(j)).norm();
      double d2 = std::abs(emb.positions[i] - emb.positions[j]);
      CHECK(std::abs(d3 - d2) < 1e-9);
    }
  CHECK(count_flipped(g.faces(), emb) == 0);
}

TEST_CASE("non-flat metric is rejected") {
  auto s = prim::sphere_band(4, 0.3);
  auto cap = prim::unit_disk(3);
  auto p = cap.positions();
  for (Vec3& x : p) x.z() = 0.5 * (x.x() * x.x() + x.y() * x.y());
  cap.set_positions(p);
  CHECK_THROWS_AS(layout_flat_metric(cap, euclidean_metric(cap)), Error);
}

TEST_CASE("flat cylinders map to annuli with modulus e^h") {
  for (double h : {1.0, 2.0}) {
    auto cyl = prim::cylinder(2 * kPi, h, 64, static_cast<int>(10 * h));
    auto r = map_annulus(cyl, euclidean_metric(cyl));
    CHECK(1.0 / r.inner_radius == doctest::Approx(std::exp(h)).epsilon(0.01));
    auto loops = cyl.boundary_loops();
    for (const auto& loop : loops) {
      double rad = std::abs(r.embedding.positions[loop[0]]);
      CHECK(max_radius_deviation(r.embedding, loop, rad) < 1e-4);
    }
    CHECK(count_flipped(cyl.faces(), r.embedding) == 0);
  }
}

TEST_CASE("sphere band maps to concentric circles") {
  auto band = prim::sphere_band(12, 0.6);
  auto r = map_annulus(band, euclidean_metric(band));
  for (const auto& loop : band.boundary_loops()) {
    double rad = std::abs(r.embedding.positions[loop[0]]);
    CHECK(max_radius_deviation(r.embedding, loop, rad) < 1e-3);
  }
  CHECK(r.inner_radius < 1.0);
}

TEST_CASE("wrong topology") {
  CHECK_THROWS_AS(map_annulus(prim::unit_disk(3), euclidean_metric(prim::unit_disk(3))), Error);
  auto tri = HalfedgeMesh::build(3, {{0, 1, 2}}, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  try {
    riemann_map(tri);
    FAIL("single triangle accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Topology);
  }
  CHECK_THROWS_AS(riemann_map(prim::icosphere(2)), Error);
}

TEST_CASE("Riemann map of the flat unit disk") {
  double prev = 1e9;
  for (int rings : {10, 20}) {
    auto d = prim::unit_disk(rings);
    auto r = riemann_map(d);
    auto loop = d.boundary_loops()[0];
    CHECK(max_radius_deviation(r.embedding, loop, 1.0) < 1e-6);
    CHECK(count_flipped(d.faces(), r.embedding) == 0);
    double eta = mean_angle_log_ratio(d, r.embedding);
    CHECK(eta < 0.05);
    CHECK(eta < prev);
    prev = eta;
  }
}

TEST_CASE("Riemann map of a curved open mesh has no flips") {
  auto cap = prim::unit_disk(12);
  auto p = cap.positions();
  for (Vec3& x : p) x.z() = 0.6 * std::exp(-3 * (x.x() * x.x() + x.y() * x.y())) + 0.2 * x.x() * x.y();
  cap.set_positions(p);
  auto r = riemann_map(cap);
  CHECK(count_flipped(cap.faces(), r.embedding) == 0);
  CHECK(max_radius_deviation(r.embedding, cap.boundary_loops()[0], 1.0) < 1e-6);
}
