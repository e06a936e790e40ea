#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sphereflow/error.hpp"
#include "sphereflow/flow.hpp"
#include "sphereflow/primitives.hpp"

using namespace sphereflow;
namespace prim = sphereflow::primitives;
constexpr double kPi = std::numbers::pi;

namespace {

ConformalState base_state(const HalfedgeMesh& m, std::vector<double> target) {
  ConformalState s;
  s.u.assign(m.num_vertices(), 0.0);
  s.target = std::move(target);
  s.beta = euclidean_metric(m).lengths;
  return s;
}

std::vector<double> uniform_sphere_target(const HalfedgeMesh& m) {
  return std::vector<double>(m.num_vertices(), 4.0 * kPi / m.num_vertices());
}

std::vector<double> curvature_minus_target(const HalfedgeMesh& m, const ConformalState& s) {
  auto K = vertex_curvature(m, corner_angles(m, conformal_lengths(m, s)));
  auto v = ricci_energy_gradient(s, K);
  for (double& x : v) x = -x;
  return v;
}

// Lobachevsky function by quadrature: -log(2t) is integrated analytically
// and the smooth remainder -log(sin t / t) by composite Gauss-Legendre.
double lobachevsky_oracle(double x) {
  double s = -x * (std::log(2.0 * x) - 1.0);
  const int panels = 2000;
  const double h = x / panels;
  const double g[2] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  for (int p = 0; p < panels; ++p) {
    double mid = (p + 0.5) * h;
    for (double gi : g) {
      double t = mid + 0.5 * h * gi;
      s -= 0.5 * h * std::log(std::sin(t) / t);
    }
  }
  return s;
}

std::vector<double> random_u(int n, std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> u(n);
  for (double& x : u) x = d(rng);
  return u;
}

}  // namespace

TEST_CASE("conformal lengths") {
  auto m = prim::tetrahedron(1.0);
  auto s = base_state(m, std::vector<double>(4, kPi));
  auto l = conformal_lengths(m, s);
  for (int e = 0; e < 6; ++e) CHECK(l[e] == doctest::Approx(s.beta[e]).epsilon(1e-15));
  s.u = {std::log(2.0), std::log(2.0), std::log(2.0), std::log(2.0)};
  l = conformal_lengths(m, s);
  for (int e = 0; e < 6; ++e) CHECK(l[e] == doctest::Approx(4 * s.beta[e]).epsilon(1e-14));
  s.u = {std::log(2.0), 0, 0, 0};
  l = conformal_lengths(m, s);
  for (int e = 0; e < 6; ++e) {
    auto v = m.edge_vertices(e);
    double factor = (v[0] == 0 || v[1] == 0) ? 2.0 : 1.0;
    CHECK(l[e] == doctest::Approx(factor * s.beta[e]).epsilon(1e-14));
  }
}

TEST_CASE("flow velocity vanishes at targets") {
  auto tet = prim::tetrahedron();
  auto s = base_state(tet, std::vector<double>(4, kPi));
  auto K = vertex_curvature(tet, corner_angles(tet, euclidean_metric(tet)));
  for (double g : ricci_energy_gradient(s, K)) CHECK(std::abs(g) < 1e-14);

  auto grid = prim::equilateral_grid(3, 3);
  auto Kg = vertex_curvature(grid, corner_angles(grid, euclidean_metric(grid)));
  auto sg = base_state(grid, Kg.values);
  for (int v = 0; v < grid.num_vertices(); ++v)
    if (!grid.is_boundary_vertex(v)) CHECK(std::abs(sg.target[v]) < 1e-12);
  for (double g : ricci_energy_gradient(sg, Kg)) CHECK(g == 0.0);
}

TEST_CASE("Lobachevsky function") {
  for (double x : {0.1, kPi / 6, 0.9, kPi / 2, 2.0, 3.0}) {
    CHECK(std::abs(lobachevsky(x) - lobachevsky_oracle(x)) < 1e-9);
  }
  // Frozen reference values (independent arbitrary-precision quadrature).
  CHECK(lobachevsky(kPi / 6) == doctest::Approx(0.507470803204827).epsilon(1e-13));
  CHECK(lobachevsky(2.0) == doctest::Approx(-0.284071972214935).epsilon(1e-13));
  CHECK(std::abs(lobachevsky(kPi / 2)) < 1e-15);
  CHECK(std::abs(lobachevsky(kPi)) < 1e-15);
  CHECK(lobachevsky(0.0) == 0.0);
}

TEST_CASE("energy gradient matches central differences") {
  std::mt19937 rng(11);
  auto m = prim::lumpy_sphere(3);
  auto s = base_state(m, uniform_sphere_target(m));
  for (int trial = 0; trial < 5; ++trial) {
    s.u = random_u(m.num_vertices(), rng, 0.05);
    auto g = curvature_minus_target(m, s);
    const double h = 1e-6;
    for (int i = 0; i < m.num_vertices(); i += 7) {
      auto sp = s, sm = s;
      sp.u[i] += h;
      sm.u[i] -= h;
      double fd = (ricci_energy(m, sp) - ricci_energy(m, sm)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
    }
  }
}

TEST_CASE("energy differences match the path integral of the gradient") {
  std::mt19937 rng(5);
  auto m = prim::ellipsoid(3, 1, 1, 2);
  auto s0 = base_state(m, uniform_sphere_target(m));
  auto s1 = s0;
  s1.u = random_u(m.num_vertices(), rng, 0.1);
  // Composite Gauss-Legendre along the segment s0 -> s1.
  double integral = 0.0;
  const int panels = 40;
  const double g[2] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  for (int p = 0; p < panels; ++p)
    for (double gi : g) {
      double t = (p + 0.5 + 0.5 * gi) / panels;
      auto st = s0;
      for (int v = 0; v < m.num_vertices(); ++v) st.u[v] = t * s1.u[v];
      auto grad = curvature_minus_target(m, st);
      double dot = 0.0;
      for (int v = 0; v < m.num_vertices(); ++v) dot += grad[v] * s1.u[v];
      integral += 0.5 * dot / panels;
    }
  CHECK(std::abs((ricci_energy(m, s1) - ricci_energy(m, s0)) - integral) < 1e-8);
}

TEST_CASE("Hessian is the cotan Laplacian") {
  std::mt19937 rng(3);
  auto m = prim::lumpy_sphere(2);
  auto s = base_state(m, uniform_sphere_target(m));
  for (int trial = 0; trial < 3; ++trial) {
    s.u = random_u(m.num_vertices(), rng, 0.05);
    Eigen::MatrixXd L(cotan_laplacian(m, corner_angles(m, conformal_lengths(m, s))));
    const double h = 1e-6;
    for (int j = 0; j < m.num_vertices(); j += 5) {
      auto sp = s, sm = s;
      sp.u[j] += h;
      sm.u[j] -= h;
      auto gp = curvature_minus_target(m, sp), gm = curvature_minus_target(m, sm);
      double scale = L.col(j).cwiseAbs().maxCoeff();
      for (int i = 0; i < m.num_vertices(); ++i) {
        CHECK(std::abs((gp[i] - gm[i]) / (2 * h) - L(i, j)) <= 1e-4 * scale);
      }
    }
  }
}

TEST_CASE("yamabe flow fixed points") {
  auto tet = prim::tetrahedron();
  auto r = yamabe_flow(tet, euclidean_metric(tet), std::vector<double>(4, kPi));
  CHECK(r.iterations == 0);
  for (double u : r.state.u) CHECK(std::abs(u) < 1e-15);

  auto grid = prim::square_grid(6);
  auto K = vertex_curvature(grid, corner_angles(grid, euclidean_metric(grid)));
  auto rg = yamabe_flow(grid, euclidean_metric(grid), K.values);
  CHECK(rg.iterations <= 1);
  for (double u : rg.state.u) CHECK(std::abs(u) < 1e-12);
}

TEST_CASE("yamabe flow rejects inadmissible targets") {
  auto tet = prim::tetrahedron();
  CHECK_THROWS_AS(yamabe_flow(tet, euclidean_metric(tet), std::vector<double>(4, 1.0)), Error);
  CHECK_THROWS_AS(yamabe_flow(tet, euclidean_metric(tet), {7.0, kPi, kPi, 4 * kPi - 7.0 - 2 * kPi}),
                  Error);
}

TEST_CASE("yamabe flow on the 1280-face icosphere") {
  auto m = prim::icosphere(8);
  REQUIRE(m.num_faces() == 1280);
  auto r = yamabe_flow(m, euclidean_metric(m), uniform_sphere_target(m));
  CHECK(r.residual < 1e-8);
  CHECK(r.iterations <= 50);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].energy <= r.trace[k - 1].energy);
  for (int e = 0; e < r.mesh.num_edges(); ++e) CHECK(is_delaunay(r.mesh, r.metric, e));
  double sum = 0;
  for (double u : r.state.u) sum += u;
  CHECK(std::abs(sum) < 1e-10);
  auto K = vertex_curvature(r.mesh, corner_angles(r.mesh, r.metric));
  for (int v = 0; v < m.num_vertices(); ++v) CHECK(std::abs(K[v] - 4 * kPi / m.num_vertices()) < 1e-8);
}

TEST_CASE("yamabe flow with flips on a lumpy sphere") {
  auto m = prim::lumpy_sphere(6);
  auto r = yamabe_flow(m, euclidean_metric(m), uniform_sphere_target(m));
  CHECK(r.residual < 1e-8);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].energy <= r.trace[k - 1].energy);
  for (int e = 0; e < r.mesh.num_edges(); ++e) CHECK(is_delaunay(r.mesh, r.metric, e));
}
