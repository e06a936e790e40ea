#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sphereflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Triangle mesh with implicit halfedges.
///
/// Halfedge `h = 3*f + c` leaves corner `c` of face `f` and points to corner
/// `c+1`, so next/prev/face are arithmetic. Boundary halfedges have no twin
/// (twin == -1); there are no explicit boundary faces. Edge ids are stable
/// under flips: a flipped edge keeps its id, only its endpoints change.
class HalfedgeMesh {
 public:
  HalfedgeMesh() = default;

  /// Builds connectivity and validates it. Throws Error(Topology) on
  /// non-manifold edges or vertices, inconsistent orientation, out-of-range
  /// indices, or repeated vertices inside a face.
  static HalfedgeMesh build(std::size_t num_vertices, std::vector<Face> faces,
                            std::vector<Vec3> positions = {});

  int num_vertices() const { return static_cast<int>(vertex_halfedge_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_halfedges() const { return 3 * num_faces(); }
  int num_edges() const { return static_cast<int>(edge_halfedge_.size()); }

  static int next(int h) { return h - h % 3 + (h % 3 + 1) % 3; }
  static int prev(int h) { return h - h % 3 + (h % 3 + 2) % 3; }
  static int face(int h) { return h / 3; }

  int origin(int h) const { return faces_[h / 3][h % 3]; }
  int target(int h) const { return origin(next(h)); }
  /// Vertex at the corner facing halfedge h.
  int opposite(int h) const { return origin(prev(h)); }
  int twin(int h) const { return twin_[h]; }
  int edge(int h) const { return edge_[h]; }
  int edge_halfedge(int e) const { return edge_halfedge_[e]; }
  /// Outgoing halfedge; the boundary one for boundary vertices (-1 if isolated).
  int vertex_halfedge(int v) const { return vertex_halfedge_[v]; }

  const Face& face_vertices(int f) const { return faces_[f]; }
  const std::vector<Face>& faces() const { return faces_; }

  bool is_boundary_halfedge(int h) const { return twin_[h] < 0; }
  bool is_boundary_edge(int e) const { return twin_[edge_halfedge_[e]] < 0; }
  bool is_boundary_vertex(int v) const {
    int h = vertex_halfedge_[v];
    return h >= 0 && twin_[h] < 0;
  }
  bool is_closed() const;

  std::array<int, 2> edge_vertices(int e) const {
    int h = edge_halfedge_[e];
    return {origin(h), target(h)};
  }

  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

  /// Boundary loops as vertex cycles, each traversed along its face
  /// halfedges (interior on the left). Loops are ordered by smallest vertex id
  /// and each starts at its smallest vertex id.
  std::vector<std::vector<int>> boundary_loops() const;

  /// Vertices adjacent to v, in rotation order.
  std::vector<int> vertex_neighbors(int v) const;
  /// Outgoing halfedges of v, in rotation order starting at vertex_halfedge(v).
  std::vector<int> outgoing_halfedges(int v) const;

  /// Replaces interior edge e by the other diagonal of its two faces.
  /// Connectivity only; geometry lives in DiscreteMetric.
  void flip(int e);

  bool has_positions() const { return !positions_.empty(); }
  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(int v) const { return positions_[v]; }
  void set_positions(std::vector<Vec3> positions);

  /// Number of connected components (vertex-connected through faces).
  int num_components() const;

 private:
  void fix_vertex_halfedge(int v);

  std::vector<Face> faces_;
  std::vector<int> twin_;
  std::vector<int> edge_;
  std::vector<int> edge_halfedge_;
  std::vector<int> vertex_halfedge_;
  std::vector<Vec3> positions_;
};

/// Positive edge lengths indexed by edge id.
struct DiscreteMetric {
  std::vector<double> lengths;

  double operator[](int e) const { return lengths[e]; }
  double& operator[](int e) { return lengths[e]; }
};

/// Corner angles indexed by halfedge: angles[h] is the angle at origin(h)
/// inside face(h).
struct CornerAngles {
  std::vector<double> angles;
  double operator[](int h) const { return angles[h]; }
};

/// Angle-deficit curvature per vertex.
struct CurvatureField {
  std::vector<double> values;
  double operator[](int v) const { return values[v]; }
  double total() const;
};

DiscreteMetric euclidean_metric(const HalfedgeMesh& mesh);

/// True iff all three strict triangle inequalities hold.
bool satisfies_triangle_inequality(double a, double b, double c);

/// Angle opposite side `a` in a triangle with sides (a, b, c), via the
/// half-angle tangent form. Requires a valid triangle.
double angle_opposite(double a, double b, double c);

/// Corner angles of every face. Throws Error(Geometry) naming the first face
/// that violates the triangle inequality.
CornerAngles corner_angles(const HalfedgeMesh& mesh, const DiscreteMetric& metric);

/// K = 2pi - sum(theta) at interior vertices, pi - sum(theta) on the boundary.
CurvatureField vertex_curvature(const HalfedgeMesh& mesh, const CornerAngles& angles);

/// sum K - 2 pi chi.
double gauss_bonnet_residual(const HalfedgeMesh& mesh, const CurvatureField& curvature);

/// Sum of the two angles facing an interior edge is <= pi (+1e-12).
bool is_delaunay(const HalfedgeMesh& mesh, const DiscreteMetric& metric, int edge);

/// Length of the other diagonal after laying out the two faces of `edge` in
/// the plane with the shared edge on the x-axis. Throws Error(Geometry) if
/// the flattened quad is not strictly convex.
double flipped_diagonal_length(const HalfedgeMesh& mesh, const DiscreteMetric& metric, int edge);

/// Flips `edge` and stores the new diagonal length in the metric.
void diagonal_switch(HalfedgeMesh& mesh, DiscreteMetric& metric, int edge);

/// Flips non-Delaunay edges until every interior edge is Delaunay. The
/// callback runs after each flip with the flipped edge id. Returns the number
/// of flips; throws Error(Geometry) past 50*|E| flips.
int make_delaunay(HalfedgeMesh& mesh, DiscreteMetric& metric,
                  const std::function<void(int)>& on_flip = {});

/// Per-edge cotangent weights: cot of each facing angle, summed over the
/// (one or two) incident faces.
std::vector<double> cotan_weights(const HalfedgeMesh& mesh, const CornerAngles& angles);

/// |V| x |V| matrix with -w_ij off the diagonal and sum_k w_ik on it.
SparseMatrix cotan_laplacian(const HalfedgeMesh& mesh, const CornerAngles& angles);

/// Face areas from edge lengths (Heron, stable form).
std::vector<double> face_areas(const HalfedgeMesh& mesh, const DiscreteMetric& metric);

/// Face areas from the stored positions. Throws Error(Geometry) on zero area.
std::vector<double> face_areas(const HalfedgeMesh& mesh);

/// One third of the incident face areas, from positions.
std::vector<double> vertex_area_weights(const HalfedgeMesh& mesh);

double total_area(const HalfedgeMesh& mesh);

}  // namespace sphereflow
