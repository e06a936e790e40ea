#pragma once

#include <string>
#include <vector>

#include "sphereflow/mesh.hpp"

namespace sphereflow {

/// Conformal factors u, target curvatures and base lengths beta of the
/// current triangulation. Lengths are l_ij = e^{u_i} beta_ij e^{u_j}.
struct ConformalState {
  std::vector<double> u;
  std::vector<double> target;
  std::vector<double> beta;
};

/// l_ij = e^{u_i} beta_ij e^{u_j}. No triangle-inequality check.
DiscreteMetric conformal_lengths(const HalfedgeMesh& mesh, const ConformalState& state);

/// The flow velocity Kbar - K. This is the negative gradient of
/// ricci_energy, which is oriented so that its Hessian is the (PSD) cotan
/// Laplacian.
std::vector<double> ricci_energy_gradient(const ConformalState& state, const CurvatureField& K);

/// Convex Ricci energy in closed form (Lobachevsky), with gradient K - Kbar
/// and Hessian cotan_laplacian. Only differences on a fixed triangulation are
/// meaningful. Throws Error(Geometry) if a face is degenerate.
double ricci_energy(const HalfedgeMesh& mesh, const ConformalState& state);

/// Lobachevsky function L(x) = -int_0^x log|2 sin t| dt.
double lobachevsky(double x);

struct YamabeOptions {
  double epsilon = 1e-8;
  int max_iterations = 500;
  double initial_step = 1.0;
  int pinned_vertex = 0;
};

struct YamabeIterate {
  int iteration = 0;
  double residual = 0;
  double energy = 0;
  double step = 0;
  int flips = 0;
};

struct YamabeResult {
  /// Triangulation after Delaunay flips; same vertex ids as the input.
  HalfedgeMesh mesh;
  ConformalState state;
  /// Final lengths on `mesh`.
  DiscreteMetric metric;
  int iterations = 0;
  double residual = 0;
  int total_flips = 0;
  /// Row 0 is the initial state; one row per accepted step after that.
  std::vector<YamabeIterate> trace;
};

/// Dynamic discrete Yamabe flow by damped Newton steps, keeping the
/// triangulation Delaunay by diagonal switches after every accepted step.
/// Throws Error(InvalidArgument) for inadmissible targets and Error(Solver)
/// on non-convergence or a failed Hessian solve.
YamabeResult yamabe_flow(const HalfedgeMesh& mesh, const DiscreteMetric& metric,
                         const std::vector<double>& target, const YamabeOptions& options = {});

void write_yamabe_trace(const std::string& path, const std::vector<YamabeIterate>& trace);

}  // namespace sphereflow
