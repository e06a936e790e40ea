#include "sphereflow/extended_complex.hpp"

#include <algorithm>
#include <cmath>

#include "sphereflow/error.hpp"

namespace sphereflow {

namespace {

using C = std::complex<double>;

[[noreturn]] void undefined(const char* what) {
  throw Error(ErrorKind::InvalidArgument, "complex", std::string("undefined operation: ") + what);
}

}  // namespace

C ExtendedComplex::value() const {
  if (inf_) throw Error(ErrorKind::InvalidArgument, "complex", "point at infinity has no finite value");
  return z_;
}

ExtendedComplex operator+(const ExtendedComplex& a, const ExtendedComplex& b) {
  if (a.inf_ && b.inf_) undefined("inf + inf");
  if (a.inf_ || b.inf_) return ExtendedComplex::infinity();
  return a.z_ + b.z_;
}

ExtendedComplex ExtendedComplex::operator-() const { return inf_ ? *this : ExtendedComplex(-z_); }

ExtendedComplex operator-(const ExtendedComplex& a, const ExtendedComplex& b) {
  if (a.inf_ && b.inf_) undefined("inf - inf");
  return a + (-b);
}

ExtendedComplex operator*(const ExtendedComplex& a, const ExtendedComplex& b) {
  if (a.inf_ || b.inf_) {
    if ((!a.inf_ && a.z_ == C(0)) || (!b.inf_ && b.z_ == C(0))) undefined("0 * inf");
    return ExtendedComplex::infinity();
  }
  return a.z_ * b.z_;
}

ExtendedComplex operator/(const ExtendedComplex& a, const ExtendedComplex& b) {
  if (a.inf_ && b.inf_) undefined("inf / inf");
  if (a.inf_) return a;
  if (b.inf_) return C(0.0, 0.0);
  if (b.z_ == C(0)) {
    if (a.z_ == C(0)) undefined("0 / 0");
    return ExtendedComplex::infinity();
  }
  return a.z_ / b.z_;
}

double chordal_distance(const ExtendedComplex& a, const ExtendedComplex& b) {
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  if (a.is_infinite()) return 2.0 / std::sqrt(1.0 + std::norm(b.value()));
  if (b.is_infinite()) return 2.0 / std::sqrt(1.0 + std::norm(a.value()));
  C x = a.value(), y = b.value();
  return 2.0 * std::abs(x - y) / std::sqrt((1.0 + std::norm(x)) * (1.0 + std::norm(y)));
}

MobiusTransform::MobiusTransform(C a, C b, C c, C d) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorKind::InvalidArgument, "mobius", "transform coefficients must be finite and not all zero");
  }
  a /= scale, b /= scale, c /= scale, d /= scale;
  C det = a * d - b * c;
  if (!(std::abs(det) > 1e-14)) {
    throw Error(ErrorKind::InvalidArgument, "mobius", "degenerate transform (ad - bc = 0)");
  }
  C s = std::sqrt(det);
  a_ = a / s, b_ = b / s, c_ = c / s, d_ = d / s;
}

ExtendedComplex MobiusTransform::operator()(const ExtendedComplex& z) const {
  if (z.is_infinite()) {
    if (c_ == C(0)) return ExtendedComplex::infinity();
    return a_ / c_;
  }
  C x = z.value();
  C den = c_ * x + d_;
  if (den == C(0)) return ExtendedComplex::infinity();
  return (a_ * x + b_) / den;
}

MobiusTransform MobiusTransform::operator*(const MobiusTransform& o) const {
  return {a_ * o.a_ + b_ * o.c_, a_ * o.b_ + b_ * o.d_, c_ * o.a_ + d_ * o.c_, c_ * o.b_ + d_ * o.d_};
}

MobiusTransform MobiusTransform::inverse() const { return {d_, -b_, -c_, a_}; }

namespace {

// Cross-ratio map sending (z1, z2, z3) to (0, 1, inf).
MobiusTransform to_standard(const ExtendedComplex& z1, const ExtendedComplex& z2, const ExtendedComplex& z3) {
  if (z1 == z2 || z2 == z3 || z1 == z3) {
    throw Error(ErrorKind::InvalidArgument, "mobius", "three-point map needs distinct points");
  }
  if (z1.is_infinite()) {
    C b = z2.value(), c = z3.value();
    return {C(0), b - c, C(1), -c};
  }
  if (z2.is_infinite()) {
    C a = z1.value(), c = z3.value();
    return {C(1), -a, C(1), -c};
  }
  if (z3.is_infinite()) {
    C a = z1.value(), b = z2.value();
    return {C(1), -a, C(0), b - a};
  }
  C a = z1.value(), b = z2.value(), c = z3.value();
  return {b - c, -a * (b - c), b - a, -c * (b - a)};
}

}  // namespace

MobiusTransform mobius_three_point(const ExtendedComplex& z1, const ExtendedComplex& z2,
                                   const ExtendedComplex& z3, const ExtendedComplex& w1,
                                   const ExtendedComplex& w2, const ExtendedComplex& w3) {
  return to_standard(w1, w2, w3).inverse() * to_standard(z1, z2, z3);
}

ExtendedComplex disk_half_plane(const ExtendedComplex& z, DiskDirection direction) {
  const C i(0.0, 1.0);
  if (direction == DiskDirection::ToDisk) {
    static const MobiusTransform to_disk(C(1), -i, C(1), i);
    return to_disk(z);
  }
  static const MobiusTransform to_half(i, i, C(-1), C(1));
  return to_half(z);
}

}  // namespace sphereflow
