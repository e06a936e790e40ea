#pragma once

#include <string>
#include <vector>

#include "sphereflow/flow.hpp"
#include "sphereflow/layout.hpp"
#include "sphereflow/segment.hpp"
#include "sphereflow/sphere.hpp"
#include "sphereflow/zipper.hpp"

namespace sphereflow {

struct ConformalMapOptions {
  YamabeOptions flow;
  NormalizeOptions normalize;
  /// Landmark vertices; -1 picks the vertex with the largest z (top) and the
  /// one with the largest x (front).
  int top_landmark = -1;
  int front_landmark = -1;
};

/// Intermediate results kept for inspection.
struct ConformalMapStages {
  EigenFunction eigen;
  CutLoop loop;
  Segmentation segmentation;
  RiemannMap disks[2];
  WeldedEmbedding weld;
  /// Welded plane per vertex of segmentation.split; `infinity_vertex` is the
  /// split id of the seam vertex at infinity.
  std::vector<ExtendedComplex> plane;
  int infinity_vertex = -1;
  /// Input positions are scaled by this factor to total area 4 pi.
  double scale = 1;
  NormalizeReport normalize;
};

/// Algorithm: segment by the first eigenfunction, Riemann-map both halves,
/// weld them with the zipper, lift by stereographic projection, normalize
/// the mass center and landmarks. Returns one unit vector per input vertex.
/// Errors carry the failing stage.
SphericalEmbedding conformal_spherical_map(const HalfedgeMesh& mesh, const ConformalMapOptions& options = {},
                                           ConformalMapStages* stages = nullptr);

/// Two disks glued along their common boundary.
struct DiskWeld {
  /// Vertices of the first disk, then the interior vertices of the second;
  /// source positions.
  HalfedgeMesh mesh;
  std::vector<ExtendedComplex> plane;
  /// Stereographic lift of the plane, before any normalization.
  SphericalEmbedding sphere;
  int infinity_vertex = -1;
  double seam_mismatch = 0;
  RiemannMap disks[2];
};

/// Riemann-maps two topological disks and welds them along the boundary
/// vertices they share by exact position; the second disk must traverse the
/// seam in the opposite direction. Throws Error(Topology) if either input is
/// not a disk or the boundaries do not match.
DiskWeld weld_disks(const HalfedgeMesh& first, const HalfedgeMesh& second, const YamabeOptions& flow = {});

/// Default landmarks of a mesh: (argmax z, argmax x), made distinct.
std::pair<int, int> default_landmarks(const HalfedgeMesh& mesh);

/// Copy of the mesh with positions scaled to total area 4 pi; returns the
/// factor through `scale`.
HalfedgeMesh rescale_to_sphere_area(const HalfedgeMesh& mesh, double* scale = nullptr);

}  // namespace sphereflow
