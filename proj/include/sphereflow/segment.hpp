#pragma once

#include <string>
#include <vector>

#include "sphereflow/mesh.hpp"

namespace sphereflow {

/// First nontrivial eigenpair of the Laplace-Beltrami operator, normalized
/// against the lumped area weights: sum w f = 0, sum w f^2 = 1.
struct EigenFunction {
  std::vector<double> values;
  double eigenvalue = 0;
  double residual = 0;
  int iterations = 0;
};

struct EigenOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
};

/// Solves L f = lambda M f with L = 1/2 cotan_laplacian (the standard
/// normalization, so the unit sphere gives lambda = 2) and M the lumped
/// vertex areas, by shift-invert subspace iteration with the constant
/// deflated. Throws Error(Topology) for open or disconnected meshes and
/// Error(Solver) on non-convergence.
EigenFunction first_eigenfunction(const HalfedgeMesh& mesh, const EigenOptions& options = {});

/// A point of the level set on edge `edge`, at parameter t from
/// edge_vertices(edge)[0].
struct LoopPoint {
  int edge = -1;
  double t = 0;
  Vec3 position;
};

/// Closed polyline through edge crossings, consecutive points sharing a face.
struct CutLoop {
  std::vector<LoopPoint> points;
  double length = 0;
};

/// Zero level set of f, chained into loops; returns the longest. Zero vertex
/// values are treated as +1e-12. Throws Error(Geometry) if f has no sign change
/// or a loop fails to close.
CutLoop zero_level_loop(const HalfedgeMesh& mesh, const std::vector<double>& f);
/// Every loop of the zero level set, longest first.
std::vector<CutLoop> zero_level_loops(const HalfedgeMesh& mesh, const std::vector<double>& f);

/// One side of the cut. `to_split` maps each local vertex to its id in
/// Segmentation::split.
struct Segment {
  HalfedgeMesh mesh;
  std::vector<int> to_split;
};

struct Segmentation {
  /// Input refined by the loop vertices; original ids come first.
  HalfedgeMesh split;
  int original_vertices = 0;
  /// Per face of `split`: 0 for the side where f > 0, 1 otherwise.
  std::vector<int> side;
  Segment disks[2];
  /// Seam vertices (ids in `split`) in the order of disks[0]'s boundary loop;
  /// disks[1]'s boundary visits them in reverse.
  std::vector<int> seam;
  double area_ratio = 1;
  std::vector<std::string> warnings;
};

/// Cuts the mesh along the loop into two disks. Split points are kept at
/// least `edge_margin` (as an edge fraction) away from both edge ends to
/// avoid sliver faces. Throws Error(Topology) if the loop does not separate
/// the mesh into two disks and Error(Geometry) if the area ratio leaves
/// [0.25, 4]; a ratio outside [0.5, 2] only warns.
Segmentation split_mesh(const HalfedgeMesh& mesh, const std::vector<double>& f, const CutLoop& loop,
                        double edge_margin = 0.1);

/// first_eigenfunction -> zero_level_loop -> split_mesh.
Segmentation segment_mesh(const HalfedgeMesh& mesh, EigenFunction* eigen_out = nullptr,
                          CutLoop* loop_out = nullptr);

void write_scalar_csv(const std::string& path, const std::vector<double>& values);

}  // namespace sphereflow
