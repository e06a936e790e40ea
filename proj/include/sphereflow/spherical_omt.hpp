#pragma once

#include <vector>

#include "sphereflow/mesh.hpp"
#include "sphereflow/omt.hpp"
#include "sphereflow/sphere.hpp"

namespace sphereflow {

struct AreaMapOptions {
  OmtOptions omt;
  /// Radius of the working disk in the stereographic plane.
  double clip_radius = 1e3;
  /// Landmarks for the final rotation; -1 picks default_landmarks.
  int top_landmark = -1;
  int front_landmark = -1;
};

struct AreaMapStages {
  /// Rotation applied before projecting, so the pole sits inside one face.
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  int pole_face = -1;
  /// Planar sites (conjugated stereographic images, counter-clockwise faces).
  std::vector<Vec2> sites;
  std::vector<double> masses;
  OmtResult omt;
  /// Density-weighted cell centroids measured on the sphere (in the rotated
  /// frame), which replace the sites.
  std::vector<Vec3> relocated;
};

/// Area-preserving spherical map from a conformal one: project, solve the
/// transport from the spherical density to the original vertex areas, move
/// every vertex to its cell centroid, and lift back. Only a landmark rotation
/// is applied afterwards, so the measure result is kept.
SphericalEmbedding area_preserving_spherical_map(const HalfedgeMesh& mesh, const SphericalEmbedding& conformal,
                                                 const AreaMapOptions& options = {},
                                                 AreaMapStages* stages = nullptr);

/// Balanced map for t in [0, 1]: t = 0 returns the conformal embedding,
/// t = 1 the area-preserving one, and in between the source density mixes
/// the conformal pushforward (weight 1 - t) with the spherical density.
SphericalEmbedding balanced_map(const HalfedgeMesh& mesh, const SphericalEmbedding& conformal, double t,
                                const AreaMapOptions& options = {}, AreaMapStages* stages = nullptr);

}  // namespace sphereflow
