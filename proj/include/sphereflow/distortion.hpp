#pragma once

#include <vector>

#include "sphereflow/mesh.hpp"

namespace sphereflow {

/// 100 uniform bins over [-max|x|, max|x|] ([-1, 1] if all samples are 0).
/// Bin k covers [edges[k], edges[k+1]); the top edge is closed.
struct Histogram {
  std::vector<double> edges;
  std::vector<int> counts;
};

struct Summary {
  double mean = 0;
  double std = 0;
  double min = 0;
  double max = 0;
};

struct DistortionSamples {
  std::vector<double> values;
  Histogram histogram;
  Summary summary;
};

struct DistortionOptions {
  /// Scale the source to the image's total area before comparing areas.
  bool normalize_area = false;
};

Histogram make_histogram(const std::vector<double>& values, int bins = 100);
Summary summarize(const std::vector<double>& values);

/// eps_i = log(image one-ring area / source one-ring area), per vertex.
/// Image areas are those of the straight (chord) triangles. Throws
/// Error(Geometry) on a zero source one-ring.
DistortionSamples area_distortion(const HalfedgeMesh& source, const std::vector<Vec3>& image,
                                  const DistortionOptions& options = {});

/// eta = log(image angle / source angle) at every corner, indexed by halfedge.
/// Throws Error(Geometry) on a degenerate corner.
DistortionSamples angle_distortion(const HalfedgeMesh& source, const std::vector<Vec3>& image);

struct JacobianStatistics {
  /// Source-area-weighted mean of s_max/s_min + s_min/s_max.
  double angle_stat = 0;
  /// Source-area-weighted mean of s_max s_min + 1/(s_max s_min).
  double area_stat = 0;
  /// Faces whose image is reversed: against the outward direction for
  /// images on the unit sphere, against the source normal otherwise.
  int flipped_faces = 0;
  std::vector<double> face_angle;
  std::vector<double> face_area;
  std::vector<double> sigma_max;
  std::vector<double> sigma_min;
};

/// Per-face Jacobian between orthonormal frames of the source and image
/// triangles. Throws Error(Geometry) on a degenerate face.
JacobianStatistics jacobian_statistics(const HalfedgeMesh& source, const std::vector<Vec3>& image,
                                       const DistortionOptions& options = {});

struct DistortionReport {
  DistortionSamples area;
  DistortionSamples angle;
  JacobianStatistics jacobian;
  bool area_normalized = false;
};

/// All three measurements. Throws Error(InvalidArgument) when the image has
/// a different vertex count.
DistortionReport distortion_report(const HalfedgeMesh& source, const std::vector<Vec3>& image,
                                   const DistortionOptions& options = {});

}  // namespace sphereflow
