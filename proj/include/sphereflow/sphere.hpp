#pragma once

#include <vector>

#include "sphereflow/extended_complex.hpp"
#include "sphereflow/mesh.hpp"

namespace sphereflow {

/// Unit vector per vertex.
struct SphericalEmbedding {
  std::vector<Vec3> positions;
};

/// (x, y) -> (2x, 2y, x^2 + y^2 - 1) / (1 + x^2 + y^2); infinity -> north pole.
Vec3 stereographic(const ExtendedComplex& z);

/// (x, y, z) -> (x, y) / (1 - z); the north pole -> infinity.
ExtendedComplex inverse_stereographic(const Vec3& p);

/// Signed area of the spherical triangle (a, b, c); positive when the
/// corners run counter-clockwise seen from outside.
double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

/// Faces whose spherical signed area is not positive.
int count_flipped(const std::vector<Face>& faces, const SphericalEmbedding& embedding);

/// Sum of signed spherical triangle areas (4 pi for a degree-one map).
double total_signed_area(const std::vector<Face>& faces, const SphericalEmbedding& embedding);

/// Sphere automorphism x -> [(1 - |a|^2)(x - a) - |x - a|^2 a] / (1 - 2<a,x> + |a|^2),
/// which sends the ball point a (|a| < 1) to the origin and pushes mass away
/// from a / |a|. The result is renormalized to unit length.
Vec3 ball_mobius(const Vec3& a, const Vec3& x);

/// sum_v w_v p_v / sum_v w_v.
Vec3 mass_center(const SphericalEmbedding& embedding, const std::vector<double>& weights);

struct NormalizeOptions {
  double tolerance = 1e-9;
  int max_iterations = 1000;
};

struct NormalizeReport {
  int iterations = 0;
  double center_norm = 0;
};

/// Moves the weighted mass center to the origin by damped ball Moebius
/// steps (halved on overshoot). Throws Error(Solver) if it does not converge.
SphericalEmbedding center_mass(const SphericalEmbedding& embedding, const std::vector<double>& weights,
                               const NormalizeOptions& options = {}, NormalizeReport* report = nullptr);

/// Rotation taking `top` to (0, 0, 1) and then `front` into the half-plane
/// y = 0, x > 0. Throws Error(InvalidArgument) if front is parallel to top.
Eigen::Matrix3d landmark_rotation(const Vec3& top, const Vec3& front);

SphericalEmbedding rotate(const SphericalEmbedding& embedding, const Eigen::Matrix3d& rotation);

/// center_mass followed by the landmark rotation.
SphericalEmbedding mobius_normalize(const SphericalEmbedding& embedding, const std::vector<double>& weights,
                                    int top, int front, const NormalizeOptions& options = {},
                                    NormalizeReport* report = nullptr);

/// Rotation minimizing sum |R p_i - q_i|^2 (Kabsch).
Eigen::Matrix3d best_rotation(const std::vector<Vec3>& p, const std::vector<Vec3>& q);

/// sqrt(mean |R p_i - q_i|^2) under best_rotation.
double rms_after_rotation(const std::vector<Vec3>& p, const std::vector<Vec3>& q);

}  // namespace sphereflow
