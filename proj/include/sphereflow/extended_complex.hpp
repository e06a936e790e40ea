#pragma once

#include <complex>

namespace sphereflow {

/// A point of the Riemann sphere: a finite complex number or infinity.
class ExtendedComplex {
 public:
  ExtendedComplex() = default;
  ExtendedComplex(std::complex<double> z) : z_(z) {}  // NOLINT: implicit by design
  ExtendedComplex(double re, double im = 0.0) : z_(re, im) {}

  static ExtendedComplex infinity() {
    ExtendedComplex e;
    e.inf_ = true;
    return e;
  }

  bool is_infinite() const { return inf_; }
  /// The finite value; throws Error(InvalidArgument) at infinity.
  std::complex<double> value() const;
  double real() const { return value().real(); }
  double imag() const { return value().imag(); }

  friend bool operator==(const ExtendedComplex& a, const ExtendedComplex& b) {
    return a.inf_ == b.inf_ && (a.inf_ || a.z_ == b.z_);
  }

  /// Riemann-sphere arithmetic. inf + inf, inf - inf, 0 * inf, 0 / 0 and
  /// inf / inf throw Error(InvalidArgument).
  friend ExtendedComplex operator+(const ExtendedComplex& a, const ExtendedComplex& b);
  friend ExtendedComplex operator-(const ExtendedComplex& a, const ExtendedComplex& b);
  friend ExtendedComplex operator*(const ExtendedComplex& a, const ExtendedComplex& b);
  friend ExtendedComplex operator/(const ExtendedComplex& a, const ExtendedComplex& b);
  ExtendedComplex operator-() const;

 private:
  std::complex<double> z_{0.0, 0.0};
  bool inf_ = false;
};

/// Distance on the Riemann sphere between the stereographic images; works
/// across infinity.
double chordal_distance(const ExtendedComplex& a, const ExtendedComplex& b);

/// z -> (a z + b) / (c z + d), stored with ad - bc = 1.
class MobiusTransform {
 public:
  MobiusTransform() = default;
  /// Throws Error(InvalidArgument) if ad - bc is (numerically) zero.
  MobiusTransform(std::complex<double> a, std::complex<double> b, std::complex<double> c,
                  std::complex<double> d);

  static MobiusTransform identity() { return {}; }

  ExtendedComplex operator()(const ExtendedComplex& z) const;
  /// (this o other)(z) = this(other(z)).
  MobiusTransform operator*(const MobiusTransform& other) const;
  MobiusTransform inverse() const;

  std::complex<double> a() const { return a_; }
  std::complex<double> b() const { return b_; }
  std::complex<double> c() const { return c_; }
  std::complex<double> d() const { return d_; }

 private:
  std::complex<double> a_{1.0, 0.0}, b_{0.0, 0.0}, c_{0.0, 0.0}, d_{1.0, 0.0};
};

/// The unique Moebius transform with T(z_k) = w_k. Throws
/// Error(InvalidArgument) if the z's or the w's are not distinct.
MobiusTransform mobius_three_point(const ExtendedComplex& z1, const ExtendedComplex& z2,
                                   const ExtendedComplex& z3, const ExtendedComplex& w1,
                                   const ExtendedComplex& w2, const ExtendedComplex& w3);

enum class DiskDirection { ToDisk, ToHalfPlane };

/// w = (z - i) / (z + i) maps the upper half plane onto the unit disk;
/// z = i (1 + w) / (1 - w) is its inverse.
ExtendedComplex disk_half_plane(const ExtendedComplex& z, DiskDirection direction);

}  // namespace sphereflow
