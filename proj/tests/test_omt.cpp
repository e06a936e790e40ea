#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "omt_oracle.hpp"
#include "sphereflow/conformal_map.hpp"
#include "sphereflow/distortion.hpp"
#include "sphereflow/error.hpp"
#include "sphereflow/primitives.hpp"
#include "sphereflow/spherical_omt.hpp"

using namespace sphereflow;
namespace prim = sphereflow::primitives;
constexpr double kPi = std::numbers::pi;

namespace {

const ConvexDomain kSquare = ConvexDomain::box({0, 0}, {1, 1});

SourceDensity uniform_square(double value = 1.0) {
  return SourceDensity::piecewise_constant({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
                                           {value, value});
}

std::vector<Vec2> random_sites(std::mt19937& rng, int n, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec2> s(n);
  for (Vec2& p : s) p = {u(rng), u(rng)};
  return s;
}

bool inside(const Polygon& poly, const Vec2& q, double tol) {
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2 e = poly[(k + 1) % poly.size()] - poly[k], d = q - poly[k];
    if (e.x() * d.y() - e.y() * d.x() < -tol * e.norm()) return false;
  }
  return true;
}

double min_x(const Polygon& p) {
  double m = 1e300;
  for (const Vec2& q : p) m = std::min(m, q.x());
  return m;
}

double max_x(const Polygon& p) {
  double m = -1e300;
  for (const Vec2& q : p) m = std::max(m, q.x());
  return m;
}

std::vector<double> centered(std::vector<double> h) {
  double mean = 0;
  for (double x : h) mean += x;
  mean /= static_cast<double>(h.size());
  for (double& x : h) x -= mean;
  return h;
}

SiteSet uniform_sites(std::vector<Vec2> sites, double total = 1.0) {
  const std::size_t n = sites.size();
  return {std::move(sites), std::vector<double>(n, total / n), {}};
}

}  // namespace

TEST_CASE("power distance") {
  CHECK(power_distance({0, 0}, {3, 4}, 2) == 27.0);
  CHECK(power_distance({1, 2}, {4, 6}, 0) == 25.0);
  // Bisectors of two sites on the unit square.
  auto d = power_diagram({{0, 0.5}, {1, 0.5}}, {0, 0}, kSquare);
  CHECK(max_x(d.cells[0].polygon) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(min_x(d.cells[1].polygon) == doctest::Approx(0.5).epsilon(1e-14));
  // x^2 + 0.25 = (x - 1)^2 at x = 0.375.
  d = power_diagram({{0, 0.5}, {1, 0.5}}, {0.25, 0}, kSquare);
  CHECK(max_x(d.cells[0].polygon) == doctest::Approx(0.375).epsilon(1e-14));
}

TEST_CASE("envelope heights and power weights describe the same cells") {
  std::vector<Vec2> y{{0.1, 0.2}, {0.7, 0.4}, {-0.3, 0.9}};
  std::vector<double> h{0.3, -0.1, 0.05};
  auto w = power_weights_from_heights(y, h);
  auto back = heights_from_power_weights(y, w);
  for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(h[i]).epsilon(1e-15));
  // Pow(q, y_i) = |q|^2 - 2 (<q, y_i> + h_i), so the orders agree.
  std::mt19937 rng(3);
  for (const Vec2& q : random_sites(rng, 100, -2, 2)) {
    int by_pow = 0, by_env = 0;
    for (int i = 1; i < 3; ++i) {
      if (power_distance(q, y[i], w[i]) < power_distance(q, y[by_pow], w[by_pow])) by_pow = i;
      if (q.dot(y[i]) + h[i] > q.dot(y[by_env]) + h[by_env]) by_env = i;
    }
    CHECK(by_pow == by_env);
  }
}

TEST_CASE("square corners give quadrant cells") {
  auto d = power_diagram({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {0, 0, 0, 0}, kSquare);
  for (const PowerCell& c : d.cells) {
    CHECK(polygon_area(c.polygon) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(inside(c.polygon, {0.5, 0.5}, 1e-12));
  }
}

TEST_CASE("cell ownership matches the power distance on random probes") {
  std::mt19937 rng(11);
  const auto sites = random_sites(rng, 1000);
  std::uniform_real_distribution<double> small(0.0, 1e-3);
  std::vector<double> w(sites.size());
  for (double& x : w) x = small(rng);
  const auto d = power_diagram(sites, w, kSquare);
  double area = 0;
  for (const auto& c : d.cells) area += polygon_area(c.polygon);
  CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
  int bad = 0;
  for (const Vec2& q : random_sites(rng, 10000)) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < sites.size(); ++i) {
      if (power_distance(q, sites[i], w[i]) < power_distance(q, sites[best], w[best])) best = i;
    }
    if (inside(d.cells[best].polygon, q, 1e-9)) continue;
    // Accept a different owner only on a tie within 1e-9.
    bool tie = false;
    for (std::size_t i = 0; i < sites.size() && !tie; ++i) {
      tie = inside(d.cells[i].polygon, q, 1e-9) &&
            power_distance(q, sites[i], w[i]) - power_distance(q, sites[best], w[best]) < 1e-9;
    }
    bad += !tie;
  }
  CHECK(bad == 0);
}

TEST_CASE("diagram input errors and empty cells") {
  CHECK_THROWS_AS(power_diagram({{0.2, 0.2}, {0.2, 0.2}}, {0, 0}, kSquare), Error);
  CHECK_THROWS_AS(power_diagram({{0.2, 0.2}, {0.5, NAN}}, {0, 0}, kSquare), Error);
  // A site whose weight dominates its neighbors everywhere has no cell.
  auto d = power_diagram({{0.1, 0.5}, {0.5, 0.5}, {0.9, 0.5}}, {0, 0.5, 0}, kSquare);
  CHECK(d.cells[1].empty());
  CHECK(d.empty_cells() == std::vector<int>{1});
}

TEST_CASE("cell measures") {
  SUBCASE("two symmetric sites under uniform density") {
    auto d = power_diagram({{0.25, 0.5}, {0.75, 0.5}}, {0, 0}, kSquare);
    auto m = cell_measures(d, uniform_square());
    CHECK(m.masses[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.masses[1] == doctest::Approx(0.5).epsilon(1e-14));
    REQUIRE(m.edges.size() == 1);
    CHECK(m.edges[0].length == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.edges[0].density == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("single site carries the total mass") {
    auto d = power_diagram({{0.3, 0.6}}, {0}, kSquare);
    CHECK(cell_measures(d, uniform_square(2.0)).masses[0] == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("spherical density on the clipped plane") {
    std::mt19937 rng(5);
    const auto sites = random_sites(rng, 200, -3, 3);
    const auto disk = ConvexDomain::disk(1e3);
    auto m = cell_measures(power_diagram(sites, std::vector<double>(200, 0.0), disk), SourceDensity::spherical());
    double total = 0;
    for (double x : m.masses) total += x;
    // The inscribed polygon misses the tail and a sliver of the rim.
    CHECK(total < 4 * kPi - spherical_tail_mass(1e3));
    CHECK(total == doctest::Approx(4 * kPi - spherical_tail_mass(1e3)).epsilon(1e-8));
    CHECK(total == doctest::Approx(SourceDensity::spherical().integrate(disk.boundary).mass).epsilon(1e-12));
  }
}

TEST_CASE("Hessian of two neighbours half a unit apart") {
  SiteSet s = uniform_sites({{0.25, 0.5}, {0.75, 0.5}});
  s.heights = {0.125, -0.125};
  SparseMatrix h = omt_hessian(s, uniform_square(), kSquare);
  CHECK(std::abs(h.coeff(0, 1)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(h.coeff(0, 1) < 0);
  CHECK(h.coeff(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("gradient and Hessian agree with finite differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  for (const auto& [density, domain, lo, hi] :
       {std::tuple{uniform_square(), kSquare, 0.0, 1.0},
        std::tuple{SourceDensity::spherical(), ConvexDomain::disk(1e3), -2.0, 2.0}}) {
    SiteSet s = uniform_sites(random_sites(rng, 25, lo, hi), density.integrate(domain.boundary).mass);
    s.heights.resize(25);
    for (int i = 0; i < 25; ++i) s.heights[i] = -0.5 * s.sites[i].squaredNorm() + jitter(rng);
    const auto g = omt_gradient(s, density, domain);
    const SparseMatrix h = omt_hessian(s, density, domain);
    const double eps = 1e-6;
    double max_h = 0;
    for (int i = 0; i < 25; ++i) max_h = std::max(max_h, std::abs(h.coeff(i, i)));
    for (int i = 0; i < 25; ++i) {
      SiteSet p = s, m = s;
      p.heights[i] += eps;
      m.heights[i] -= eps;
      const double fd = (omt_energy(p, density, domain) - omt_energy(m, density, domain)) / (2 * eps);
      CHECK(std::abs(fd - g[i]) < 1e-5);
      const auto gp = omt_gradient(p, density, domain), gm = omt_gradient(m, density, domain);
      for (int j = 0; j < 25; ++j) {
        CHECK(std::abs((gp[j] - gm[j]) / (2 * eps) - h.coeff(j, i)) < 1e-4 * max_h);
      }
    }
  }
}

TEST_CASE("Hessian is a PSD Laplacian with a one-dimensional kernel") {
  std::mt19937 rng(13);
  SiteSet s = uniform_sites(random_sites(rng, 150));
  const SparseMatrix h = omt_hessian(s, uniform_square(), kSquare);
  const Eigen::MatrixXd dense(h);
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(dense.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  const auto& ev = eig.eigenvalues();
  CHECK(ev[0] >= -1e-9);
  CHECK(std::abs(ev[0]) < 1e-9);
  CHECK(ev[1] > 1e-6);
}

TEST_CASE("two-site transport on the unit square") {
  const std::vector<Vec2> y{{0.25, 0.5}, {0.75, 0.5}};
  SUBCASE("equal masses keep the bisector") {
    auto r = solve_omt({y, {0.5, 0.5}, {}}, uniform_square(), kSquare, {1e-10, 100});
    // The boundary sits at x = 2 (h0 - h1).
    CHECK(r.heights[0] == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(r.heights[1] == doctest::Approx(-0.125).epsilon(1e-12));
    CHECK(max_x(r.diagram.cells[0].polygon) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("masses 1/4 and 3/4 move the boundary to x = 1/4") {
    auto r = solve_omt({y, {0.25, 0.75}, {}}, uniform_square(), kSquare, {1e-10, 100});
    CHECK(std::abs(max_x(r.diagram.cells[0].polygon) - 0.25) < 1e-4);
    CHECK(std::abs(r.heights[0] - r.heights[1] - 0.125) < 1e-3);
    double gmax = 0;
    for (int i = 0; i < 2; ++i) gmax = std::max(gmax, std::abs(r.measures.masses[i] - (i ? 0.75 : 0.25)));
    CHECK(gmax < 1e-8);
    // One-dimensional brute-force search over the gap with grid integration.
    double lo = -1, hi = 1;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (testutil::grid_masses(y, {mid, 0.0}, 2000)[0] < 0.25 ? lo : hi) = mid;
    }
    CHECK(std::abs(0.5 * (lo + hi) - 0.125) < 1e-3);
  }
}

TEST_CASE("grid search oracle agrees with Newton on a few sites") {
  std::mt19937 rng(17);
  for (int k : {3, 5}) {
    const auto y = random_sites(rng, k, 0.1, 0.9);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> nu(k);
    double sum = 0;
    for (double& x : nu) x = u(rng), sum += x;
    for (double& x : nu) x /= sum;
    const auto r = solve_omt({y, nu, {}}, uniform_square(), kSquare);
    const auto oracle = testutil::grid_height_search(y, nu, 2000);
    for (int i = 0; i < k; ++i) CHECK(std::abs(r.heights[i] - oracle[i]) < 1e-3);
  }
}

TEST_CASE("Newton converges on 10K sites and the heights are unique up to a constant") {
  std::mt19937 rng(19);
  SiteSet s = uniform_sites(random_sites(rng, 10000));
  const auto a = solve_omt(s, uniform_square(), kSquare);
  CHECK(a.iterations <= 30);
  CHECK(a.residual < 1e-6);
  double mean = 0;
  for (double h : a.heights) mean += h;
  CHECK(std::abs(mean) < 1e-10);
  CHECK(a.trace.size() == static_cast<std::size_t>(a.iterations + 1));
  for (std::size_t k = 1; k < a.trace.size(); ++k) CHECK(a.trace[k].min_cell_mass > 0);

  std::uniform_real_distribution<double> jitter(-1e-8, 1e-8);
  s.heights.resize(s.sites.size());
  for (std::size_t i = 0; i < s.sites.size(); ++i) s.heights[i] = -0.5 * s.sites[i].squaredNorm() + 3.0 + jitter(rng);
  const auto b = solve_omt(s, uniform_square(), kSquare);
  const auto ca = centered(a.heights), cb = centered(b.heights);
  double diff = 0;
  for (std::size_t i = 0; i < ca.size(); ++i) diff = std::max(diff, std::abs(ca[i] - cb[i]));
  CHECK(diff < 1e-6);
}

TEST_CASE("solver input errors") {
  const std::vector<Vec2> y{{0.25, 0.5}, {0.75, 0.5}};
  CHECK_THROWS_AS(solve_omt({y, {0.5}, {}}, uniform_square(), kSquare), Error);
  CHECK_THROWS_AS(solve_omt({y, {0.5, 0.6}, {}}, uniform_square(), kSquare), Error);
  CHECK_THROWS_AS(solve_omt({y, {1.0, 0.0}, {}}, uniform_square(), kSquare), Error);
  CHECK_THROWS_AS(solve_omt({y, {0.5, 0.5}, {0.0, 1.0}}, uniform_square(), kSquare), Error);  // empty cell
  try {
    std::mt19937 rng(23);
    solve_omt(uniform_sites(random_sites(rng, 50)), uniform_square(), kSquare, {1e-12, 1});
    FAIL("expected non-convergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Solver);
  }
}

TEST_CASE("source densities") {
  const Vec2 q(0.3, -0.2);
  const double sph = 4.0 / std::pow(1.0 + q.squaredNorm(), 2);
  CHECK(spherical_density(q) == sph);
  CHECK(spherical_tail_mass(1e3) == doctest::Approx(4 * kPi / (1 + 1e6)).epsilon(1e-15));
  CHECK(SourceDensity::spherical().total_mass() == doctest::Approx(4 * kPi).epsilon(1e-15));

  // A tetrahedron-like planar map: three counter-clockwise faces and one
  // inverted face over infinity.
  const std::vector<Vec2> p{{0, 0}, {1, 0}, {0, 1}, {0.3, 0.3}};
  const std::vector<Face> f{{0, 1, 3}, {1, 2, 3}, {2, 0, 3}, {0, 2, 1}};
  const std::vector<double> masses{1.0, 2.0, 1.5, 4 * kPi - 4.5};
  const auto push = SourceDensity::pushforward(p, f, masses);
  CHECK(push.total_mass() == doctest::Approx(4 * kPi).epsilon(1e-12));
  CHECK(push.value({0.3, 0.1}) == doctest::Approx(1.0 / 0.15).epsilon(1e-12));
  const double outside = push.value({2, 2}) / spherical_density({2, 2});
  CHECK(push.integrate(ConvexDomain::disk(1e3).boundary).mass ==
        doctest::Approx(4 * kPi - outside * spherical_tail_mass(1e3)).epsilon(1e-9));
  CHECK_THROWS_AS(SourceDensity::pushforward(p, {f[0], f[1], f[2]}, {1, 2, 1.5}), Error);

  const auto sphd = SourceDensity::spherical();
  for (const Vec2& x : {Vec2(0.3, 0.1), Vec2(2, 2), Vec2(-1, 0.5)}) {
    CHECK(interpolate_density(0, push, sphd).value(x) == sphd.value(x));
    CHECK(interpolate_density(1, push, sphd).value(x) == push.value(x));
    CHECK(interpolate_density(0.5, push, sphd).value(x) ==
          doctest::Approx(0.5 * (push.value(x) + sphd.value(x))).epsilon(1e-15));
  }
  CHECK(interpolate_density(0.3, push, sphd).total_mass() == doctest::Approx(4 * kPi).epsilon(1e-12));
  CHECK_THROWS_AS(interpolate_density(1.5, push, sphd), Error);
  CHECK_THROWS_AS(interpolate_density(0.5, push, SourceDensity::spherical(2.0)), Error);
}

TEST_CASE("polygon integrals of the spherical density") {
  const auto s = SourceDensity::spherical();
  const Polygon box{{0.2, -0.3}, {1.5, -0.3}, {1.5, 0.7}, {0.2, 0.7}};
  const auto exact = s.integrate(box, true);
  // Midpoint grid oracle.
  const int n = 1500;
  double m = 0;
  Vec2 mom = Vec2::Zero();
  Vec3 lifted = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 q(0.2 + 1.3 * (i + 0.5) / n, -0.3 + (j + 0.5) / n);
      const double w = spherical_density(q) * 1.3 / n / n;
      m += w;
      mom += w * q;
      const double d = 1 + q.squaredNorm();
      lifted += w * Vec3(2 * q.x() / d, 2 * q.y() / d, 1 - 2 / d);
    }
  }
  CHECK(exact.mass == doctest::Approx(m).epsilon(1e-6));
  CHECK(exact.moment.x() == doctest::Approx(mom.x()).epsilon(1e-6));
  CHECK(exact.moment.y() == doctest::Approx(mom.y()).epsilon(1e-6));
  const Vec3 lm = s.lifted_moment(box);
  for (int c = 0; c < 3; ++c) CHECK(lm[c] == doctest::Approx(lifted[c]).epsilon(1e-6));
  // Line integral against a fine midpoint rule.
  const Vec2 a(-0.5, 0.3), b(2, 1.1);
  double line = 0;
  for (int i = 0; i < 200000; ++i) line += spherical_density(a + (b - a) * ((i + 0.5) / 200000));
  line *= (b - a).norm() / 200000;
  CHECK(s.line_integral(a, b) == doctest::Approx(line).epsilon(1e-9));
}

TEST_CASE("area-preserving map of a round sphere barely moves it") {
  const auto m = prim::icosphere(23);
  const auto conf = conformal_spherical_map(m);
  AreaMapStages st;
  const auto out = area_preserving_spherical_map(m, conf, {}, &st);
  double moved = 0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    moved = std::max(moved, (st.relocated[v] - st.rotation * conf.positions[v]).norm());
  }
  CHECK(moved < 1e-2);
  CHECK(st.omt.residual < 1e-6);
  for (const Vec3& p : out.positions) CHECK(std::abs(p.norm() - 1.0) < 1e-12);
  CHECK(count_flipped(m.faces(), out) == 0);
}

TEST_CASE("balanced maps on a 1:1:2 ellipsoid trade angle for area") {
  const auto m = prim::ellipsoid(23, 1, 1, 2);
  REQUIRE(m.num_faces() >= 10000);
  const auto conf = conformal_spherical_map(m);
  const DistortionOptions norm{true};
  std::vector<double> angle, area, eps_std, eta_std;
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto e = balanced_map(m, conf, t);
    if (t == 0.0) CHECK(e.positions == conf.positions);
    auto r = distortion_report(m, e.positions, norm);
    angle.push_back(r.jacobian.angle_stat);
    area.push_back(r.jacobian.area_stat);
    eps_std.push_back(r.area.summary.std);
    eta_std.push_back(r.angle.summary.std);
    CHECK(r.jacobian.flipped_faces == 0);
    if (t == 1.0) {
      double mean_abs = 0;
      for (double x : r.area.values) mean_abs += std::abs(x);
      CHECK(mean_abs / r.area.values.size() < 0.02);
      const auto ap = area_preserving_spherical_map(m, conf);
      double gap = 0;
      for (int v = 0; v < m.num_vertices(); ++v) gap = std::max(gap, (ap.positions[v] - e.positions[v]).norm());
      CHECK(gap == 0.0);
    }
  }
  for (int k = 1; k < 5; ++k) {
    CHECK(angle[k] >= angle[k - 1] * 0.99);
    CHECK(area[k] <= area[k - 1] * 1.01);
  }
  CHECK(eps_std[4] < eps_std[0]);
  CHECK(eta_std[4] > eta_std[0]);
  CHECK(angle[2] > angle[0]);
  CHECK(angle[2] < angle[4]);
  CHECK(area[2] < area[0]);
  CHECK(area[2] > area[4]);
  CHECK_THROWS_AS(balanced_map(m, conf, -0.1), Error);
}
