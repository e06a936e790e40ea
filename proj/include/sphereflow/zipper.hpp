#pragma once

#include <functional>
#include <vector>

#include "sphereflow/extended_complex.hpp"
#include "sphereflow/layout.hpp"
#include "sphereflow/segment.hpp"

namespace sphereflow {

/// Boundary correspondence between two disk images. first[k] (a vertex of
/// D1) is glued to second[k] (a vertex of D2). The first list runs
/// counter-clockwise on the boundary of D1, the second clockwise on D2.
struct WeldingSignature {
  std::vector<int> first;
  std::vector<int> second;
};

/// The seam of a segmentation as a signature between its two disks.
WeldingSignature welding_signature(const Segmentation& segmentation);

/// Upper-half-plane branch of sqrt(z^2 + 1): zeta(i) = 0, zeta(+-1) = +-sqrt(2).
/// Inverse of zipper_fold.
ExtendedComplex zipper_zeta(const ExtendedComplex& z);

/// The gluing map sqrt(z^2 - 1) from the closed upper half plane to itself:
/// [-1, 0] and [0, 1] fold onto the segment [0, i], +-1 go to 0.
/// Throws Error(Geometry) for a point below the real axis.
ExtendedComplex zipper_fold(const ExtendedComplex& z);

enum class HalfPlane { Upper, Lower };

/// Square root of a point of the closed half plane `side`, with the result
/// in the closed upper half plane. On the positive real axis the side picks
/// the sign: + for Upper, - for Lower.
ExtendedComplex half_plane_sqrt(const ExtendedComplex& z, HalfPlane side);

/// Positions during welding, indexed like the inputs.
struct WeldState {
  std::vector<ExtendedComplex> first;
  std::vector<ExtendedComplex> second;
};

struct ZipperOptions {
  /// Largest allowed distance between glued seam copies.
  double seam_tolerance = 1e-6;
  /// Called after the first step (k = 2) and after every fold (k >= 3),
  /// where seam vertex k has just been glued at 0.
  std::function<void(int k, const WeldState&)> observer;
};

struct WeldedEmbedding {
  /// Extended-plane positions of the vertices of D1 and D2.
  WeldState positions;
  /// Seam index sent to infinity (always 0).
  int infinity_seam_index = 0;
  /// max_k |first[seam k] - second[seam k]|, chordal.
  double seam_mismatch = 0;
};

/// Zipper welding of two unit-disk images along `signature`. The glued
/// plane has D1 on the left of the seam curve and seam vertex 0 at infinity.
WeldedEmbedding zipper_weld(const PlanarEmbedding& d1, const PlanarEmbedding& d2,
                            const WeldingSignature& signature, const ZipperOptions& options = {});

}  // namespace sphereflow
