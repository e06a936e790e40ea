#pragma once

#include <string>
#include <vector>

#include "sphereflow/density.hpp"
#include "sphereflow/mesh.hpp"
#include "sphereflow/power_diagram.hpp"

namespace sphereflow {

/// Dirac targets of a semi-discrete transport problem. Heights are the
/// upper-envelope heights of u(q) = max_i <q, y_i> + h_i; an empty vector
/// means the Voronoi start h_i = -|y_i|^2 / 2.
struct SiteSet {
  std::vector<Vec2> sites;
  std::vector<double> masses;
  std::vector<double> heights;
};

/// Adjacent cells i < j and the density integral along their shared edge.
struct CellEdge {
  int i = 0;
  int j = 0;
  double length = 0;
  double density = 0;
};

struct CellMeasures {
  /// w_i: source mass of each cell.
  std::vector<double> masses;
  /// Density moments of each cell (filled only when requested).
  std::vector<Vec2> moments;
  std::vector<CellEdge> edges;
};

/// Power diagram of the heights on `domain`.
PowerDiagram height_diagram(const std::vector<Vec2>& sites, const std::vector<double>& heights,
                            const ConvexDomain& domain);

/// Cell masses, optional moments, and per-edge density integrals.
CellMeasures cell_measures(const PowerDiagram& diagram, const SourceDensity& density, bool with_moments = false);

/// E(h) = int u_h rho - sum nu_i h_i over the domain.
double omt_energy(const SiteSet& sites, const SourceDensity& density, const ConvexDomain& domain);
/// w(h) - nu.
std::vector<double> omt_gradient(const SiteSet& sites, const SourceDensity& density, const ConvexDomain& domain);
/// dw/dh: -(int_e rho) / |y_i - y_j| off the diagonal, negated row sums on it.
SparseMatrix omt_hessian(const SiteSet& sites, const SourceDensity& density, const ConvexDomain& domain);
SparseMatrix omt_hessian(const std::vector<Vec2>& sites, const CellMeasures& measures);

struct OmtOptions {
  /// Stop when max_i |w_i - nu_i| / nu_i falls below this.
  double tolerance = 1e-6;
  int max_iterations = 100;
};

struct OmtIterate {
  int iteration = 0;
  double residual = 0;
  double step = 0;
  double min_cell_mass = 0;
};

struct OmtResult {
  /// Converged heights with zero mean.
  std::vector<double> heights;
  PowerDiagram diagram;
  CellMeasures measures;
  int iterations = 0;
  double residual = 0;
  /// Row 0 is the initial state.
  std::vector<OmtIterate> trace;
};

/// Damped Newton on the convex energy. A step is accepted once every cell
/// keeps at least half the smallest initial (or target) mass and the
/// gradient norm has decreased enough; otherwise the step halves. Throws
/// Error(InvalidArgument) on bad input or an empty starting cell, and
/// Error(Solver) on non-convergence or a failed solve.
OmtResult solve_omt(const SiteSet& sites, const SourceDensity& density, const ConvexDomain& domain,
                    const OmtOptions& options = {});

/// Density-weighted centroids (moments / masses) of the cells.
std::vector<Vec2> cell_centroids(const PowerDiagram& diagram, const SourceDensity& density);

void write_omt_trace(const std::string& path, const std::vector<OmtIterate>& trace);

}  // namespace sphereflow
