#include "sphereflow/omt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/SparseCholesky>

#include "sphereflow/error.hpp"
#include "sphereflow/parallel.hpp"

namespace sphereflow {

namespace {

constexpr const char* kStage = "omt";

std::vector<double> voronoi_heights(const std::vector<Vec2>& sites) {
  std::vector<double> h(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) h[i] = -0.5 * sites[i].squaredNorm();
  return h;
}

void remove_mean(std::vector<double>& h) {
  double mean = 0;
  for (double x : h) mean += x;
  mean /= static_cast<double>(h.size());
  for (double& x : h) x -= mean;
}

std::vector<double> start_heights(const SiteSet& s) {
  if (s.heights.empty()) return voronoi_heights(s.sites);
  if (s.heights.size() != s.sites.size()) {
    throw Error(ErrorKind::InvalidArgument, kStage, "heights and sites differ in length");
  }
  return s.heights;
}

double norm2(const std::vector<double>& g) {
  double s = 0;
  for (double x : g) s += x * x;
  return std::sqrt(s);
}

}  // namespace

PowerDiagram height_diagram(const std::vector<Vec2>& sites, const std::vector<double>& heights,
                            const ConvexDomain& domain) {
  return power_diagram(sites, power_weights_from_heights(sites, heights), domain);
}

CellMeasures cell_measures(const PowerDiagram& diagram, const SourceDensity& density, bool with_moments) {
  const std::size_t n = diagram.cells.size();
  CellMeasures out;
  out.masses.assign(n, 0.0);
  out.moments.assign(n, Vec2::Zero());
  std::vector<std::vector<CellEdge>> edges(n);
  parallel_for(n, [&](std::size_t i) {
    const PowerCell& cell = diagram.cells[i];
    if (cell.empty()) return;
    const auto m = density.integrate(cell.polygon, with_moments);
    out.masses[i] = m.mass;
    out.moments[i] = m.moment;
    const std::size_t k = cell.polygon.size();
    for (std::size_t e = 0; e < k; ++e) {
      const int j = cell.neighbors[e];
      if (j <= static_cast<int>(i)) continue;
      const Vec2& a = cell.polygon[e];
      const Vec2& b = cell.polygon[(e + 1) % k];
      const double len = (b - a).norm();
      if (len == 0.0) continue;
      edges[i].push_back({static_cast<int>(i), j, len, density.line_integral(a, b)});
    }
  });
  for (auto& e : edges) out.edges.insert(out.edges.end(), e.begin(), e.end());
  return out;
}

SparseMatrix omt_hessian(const std::vector<Vec2>& sites, const CellMeasures& measures) {
  const int n = static_cast<int>(sites.size());
  std::vector<Eigen::Triplet<double>> t;
  std::vector<double> diag(n, 0.0);
  for (const CellEdge& e : measures.edges) {
    const double w = e.density / (sites[e.i] - sites[e.j]).norm();
    t.emplace_back(e.i, e.j, -w);
    t.emplace_back(e.j, e.i, -w);
    diag[e.i] += w;
    diag[e.j] += w;
  }
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, diag[i]);
  SparseMatrix h(n, n);
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

double omt_energy(const SiteSet& s, const SourceDensity& density, const ConvexDomain& domain) {
  const auto h = start_heights(s);
  const auto m = cell_measures(height_diagram(s.sites, h, domain), density, true);
  double e = 0;
  for (std::size_t i = 0; i < s.sites.size(); ++i) {
    e += m.moments[i].dot(s.sites[i]) + h[i] * m.masses[i];
    if (i < s.masses.size()) e -= s.masses[i] * h[i];
  }
  return e;
}

std::vector<double> omt_gradient(const SiteSet& s, const SourceDensity& density, const ConvexDomain& domain) {
  if (s.masses.size() != s.sites.size()) {
    throw Error(ErrorKind::InvalidArgument, kStage, "masses and sites differ in length");
  }
  auto g = cell_measures(height_diagram(s.sites, start_heights(s), domain), density).masses;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= s.masses[i];
  return g;
}

SparseMatrix omt_hessian(const SiteSet& s, const SourceDensity& density, const ConvexDomain& domain) {
  return omt_hessian(s.sites, cell_measures(height_diagram(s.sites, start_heights(s), domain), density));
}

OmtResult solve_omt(const SiteSet& s, const SourceDensity& density, const ConvexDomain& domain,
                    const OmtOptions& options) {
  const int n = static_cast<int>(s.sites.size());
  if (n == 0) throw Error(ErrorKind::InvalidArgument, kStage, "no sites");
  if (static_cast<int>(s.masses.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, kStage, "masses and sites differ in length");
  }
  if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, kStage, "tolerance and iteration limit must be positive");
  }
  double target = 0, min_nu = std::numeric_limits<double>::infinity();
  for (double m : s.masses) {
    if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorKind::InvalidArgument, kStage, "target masses must be positive");
    target += m;
    min_nu = std::min(min_nu, m);
  }
  const double source = density.integrate(domain.boundary).mass;
  if (std::abs(source - target) > 1e-8 * source) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "target mass %.12g differs from source mass %.12g", target, source);
    throw Error(ErrorKind::InvalidArgument, kStage, buf);
  }

  std::vector<double> h = start_heights(s);
  OmtResult r;
  r.diagram = height_diagram(s.sites, h, domain);
  r.measures = cell_measures(r.diagram, density);

  auto gradient = [&](const CellMeasures& m) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = m.masses[i] - s.masses[i];
    return g;
  };
  auto residual = [&](const std::vector<double>& g) {
    double res = 0;
    for (int i = 0; i < n; ++i) res = std::max(res, std::abs(g[i]) / s.masses[i]);
    return res;
  };
  auto min_mass = [](const CellMeasures& m) { return *std::min_element(m.masses.begin(), m.masses.end()); };

  const double w0 = min_mass(r.measures);
  if (!(w0 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "starting heights leave an empty cell");
  }
  const double floor_mass = 0.5 * std::min(w0, min_nu);

  std::vector<double> g = gradient(r.measures);
  double step = 0;
  for (int it = 0;; ++it) {
    r.residual = residual(g);
    r.iterations = it;
    r.trace.push_back({it, r.residual, step, min_mass(r.measures)});
    if (r.residual < options.tolerance) break;
    if (it >= options.max_iterations) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "no convergence after %d Newton iterations (residual %.3e)", it, r.residual);
      throw Error(ErrorKind::Solver, kStage, buf);
    }

    // Newton direction with site 0 pinned; the Hessian kernel is the constants.
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    if (n > 1) {
      const SparseMatrix hess = omt_hessian(s.sites, r.measures);
      const SparseMatrix reduced = hess.bottomRightCorner(n - 1, n - 1);
      Eigen::SimplicialLDLT<SparseMatrix> solver(reduced);
      Eigen::VectorXd rhs(n - 1);
      for (int i = 1; i < n; ++i) rhs[i - 1] = g[i];
      if (solver.info() != Eigen::Success) throw Error(ErrorKind::Solver, kStage, "Hessian factorization failed");
      delta.tail(n - 1) = solver.solve(rhs);
      if (solver.info() != Eigen::Success || !delta.allFinite()) {
        throw Error(ErrorKind::Solver, kStage, "Hessian solve failed");
      }
    }

    const double gnorm = norm2(g);
    double alpha = 1.0;
    for (;;) {
      std::vector<double> trial(n);
      for (int i = 0; i < n; ++i) trial[i] = h[i] - alpha * delta[i];
      PowerDiagram d = height_diagram(s.sites, trial, domain);
      CellMeasures m = cell_measures(d, density);
      std::vector<double> tg = gradient(m);
      if (min_mass(m) >= floor_mass && norm2(tg) <= (1.0 - 0.5 * alpha) * gnorm) {
        h = std::move(trial);
        r.diagram = std::move(d);
        r.measures = std::move(m);
        g = std::move(tg);
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-12) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "line search stalled at iteration %d (residual %.3e)", it, r.residual);
        throw Error(ErrorKind::Solver, kStage, buf);
      }
    }
    step = alpha;
  }
  remove_mean(h);
  r.heights = std::move(h);
  return r;
}

std::vector<Vec2> cell_centroids(const PowerDiagram& diagram, const SourceDensity& density) {
  const auto m = cell_measures(diagram, density, true);
  std::vector<Vec2> c(m.masses.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(m.masses[i] > 0.0)) {
      throw Error(ErrorKind::Geometry, kStage, "cell " + std::to_string(i) + " carries no mass");
    }
    c[i] = m.moments[i] / m.masses[i];
  }
  return c;
}

void write_omt_trace(const std::string& path, const std::vector<OmtIterate>& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, kStage, "cannot write trace " + path);
  out << "iteration,residual,step,min_cell_mass\n";
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.iteration, r.residual, r.step, r.min_cell_mass);
    out << buf;
  }
}

}  // namespace sphereflow
