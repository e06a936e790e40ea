#pragma once

#include <array>
#include <memory>
#include <vector>

#include "sphereflow/mesh.hpp"
#include "sphereflow/power_diagram.hpp"

namespace sphereflow {

/// Stereographic pullback of the sphere's area element, 4 / (1 + |q|^2)^2.
double spherical_density(const Vec2& q);

struct DensityIntegrals {
  double mass = 0;
  /// Integral of rho(q) q (zero unless requested).
  Vec2 moment = Vec2::Zero();
};

/// Source measure on the plane: a nonnegative combination of the spherical
/// density, piecewise-constant triangle densities, and scaled spherical
/// density outside a triangle. Polygon integrals of the piecewise-constant
/// parts are exact; spherical masses and edge integrals have closed forms
/// and spherical moments use adaptive Gauss-Legendre quadrature.
class SourceDensity {
 public:
  SourceDensity() = default;

  static SourceDensity spherical(double scale = 1.0);

  /// values[f] on the counter-clockwise, non-overlapping triangles `faces`
  /// of `vertices`; zero elsewhere.
  static SourceDensity piecewise_constant(const std::vector<Vec2>& vertices, const std::vector<Face>& faces,
                                          const std::vector<double>& values);

  /// Pushforward of per-face masses under a planar map of a closed mesh:
  /// each counter-clockwise image triangle carries mass / image area. The
  /// inverted triangles (the faces around the point at infinity) spread
  /// their mass as scaled spherical density outside the union of the
  /// counter-clockwise ones. Throws Error(Geometry) if no face is inverted.
  static SourceDensity pushforward(const std::vector<Vec2>& planar, const std::vector<Face>& faces,
                                   const std::vector<double>& face_masses);

  /// a x + b y for a, b >= 0.
  static SourceDensity combine(double a, const SourceDensity& x, double b, const SourceDensity& y);

  double value(const Vec2& q) const;
  /// Integral over a convex counter-clockwise polygon.
  DensityIntegrals integrate(const Polygon& polygon, bool with_moment = false) const;
  /// Integral along the segment a -> b with respect to arc length.
  double line_integral(const Vec2& a, const Vec2& b) const;
  /// Integral of rho(q) times the inverse stereographic image of q (north
  /// pole at infinity) over a convex counter-clockwise polygon.
  Vec3 lifted_moment(const Polygon& polygon) const;
  /// Integral over the whole plane.
  double total_mass() const;

  struct TriangleSet;

 private:
  // scale * spherical density outside the union of `region`'s triangles.
  // The disk |q| <= inner_radius lies inside that union.
  struct Exterior {
    double scale;
    std::shared_ptr<const TriangleSet> region;
    double inner_radius;
  };
  double spherical_scale_ = 0;
  std::vector<std::pair<double, std::shared_ptr<const TriangleSet>>> triangles_;
  std::vector<Exterior> exterior_;
};

/// Mixture (1 - t) spherical + t conformal. Throws Error(InvalidArgument)
/// if t is outside [0, 1] or the total masses differ by more than 1e-6
/// relative.
SourceDensity interpolate_density(double t, const SourceDensity& conformal, const SourceDensity& spherical);

/// Spherical mass beyond radius R: 4 pi / (1 + R^2).
double spherical_tail_mass(double radius);

}  // namespace sphereflow
