#pragma once

#include <complex>
#include <vector>

#include "sphereflow/flow.hpp"
#include "sphereflow/mesh.hpp"

namespace sphereflow {

using Complex = std::complex<double>;

/// Planar coordinates per vertex.
struct PlanarEmbedding {
  std::vector<Complex> positions;
};

/// Per-corner layout: corners[h] is where origin(h) lands inside face(h).
/// Vertices on a cut carry one coordinate per side.
struct CornerLayout {
  std::vector<Complex> corners;
};

/// Develops faces breadth-first from `seed_face` across every interior edge
/// not marked in `cut` (indexed by edge id; empty means no cut). The seed's
/// first halfedge lies on the positive real axis from 0. Throws
/// Error(Topology) if some face is unreachable.
CornerLayout layout_corners(const HalfedgeMesh& mesh, const DiscreteMetric& metric,
                            const std::vector<char>& cut = {}, int seed_face = 0);

/// Isometric layout of a flat, simply connected mesh. Throws
/// Error(Geometry) when corner copies of a vertex disagree by more than
/// 1e-6 relative to the layout diameter (holonomy of a non-flat metric).
PlanarEmbedding layout_flat_metric(const HalfedgeMesh& mesh, const DiscreteMetric& metric);

struct AnnulusOptions {
  YamabeOptions flow;
  /// A vertex on the boundary that should become the outer circle; -1 picks
  /// the longer boundary loop.
  int outer_vertex = -1;
};

struct AnnulusMap {
  /// Per vertex of the input mesh; outer boundary on |z| = 1.
  PlanarEmbedding embedding;
  double inner_radius = 0;
  double outer_radius = 1;
  /// Vertex path of the cut, from the inner boundary to the outer one.
  std::vector<int> cut_path;
  /// The flow's Delaunay triangulation of the input.
  HalfedgeMesh flipped_mesh;
  int flow_iterations = 0;
  int flips = 0;
  std::vector<YamabeIterate> flow_trace;
};

/// Conformal map of a topological annulus onto {r <= |z| <= 1}.
AnnulusMap map_annulus(const HalfedgeMesh& mesh, const DiscreteMetric& metric,
                       const AnnulusOptions& options = {});

struct RiemannMap {
  /// Per vertex of the input mesh; boundary on the unit circle.
  PlanarEmbedding embedding;
  /// Face removed to make the annulus; refilled as one triangle.
  int punctured_face = -1;
  double hole_radius = 0;
  int flow_iterations = 0;
  int flips = 0;
  std::vector<YamabeIterate> flow_trace;
};

/// Discrete Riemann map of a topological disk onto the unit disk.
RiemannMap riemann_map(const HalfedgeMesh& mesh, const DiscreteMetric& metric,
                       const YamabeOptions& flow = {});
RiemannMap riemann_map(const HalfedgeMesh& mesh, const YamabeOptions& flow = {});

/// Signed area of the triangle (a, b, c).
double signed_area(Complex a, Complex b, Complex c);

/// Faces of `faces` with non-positive signed area under `embedding`.
int count_flipped(const std::vector<Face>& faces, const PlanarEmbedding& embedding);

}  // namespace sphereflow
