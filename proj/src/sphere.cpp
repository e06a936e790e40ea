#include "sphereflow/sphere.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "sphereflow/error.hpp"

namespace sphereflow {

Vec3 stereographic(const ExtendedComplex& z) {
  if (z.is_infinite()) return {0.0, 0.0, 1.0};
  const double x = z.real(), y = z.imag();
  const double r2 = x * x + y * y;
  if (!std::isfinite(r2)) return {0.0, 0.0, 1.0};
  const double d = 1.0 + r2;
  return {2.0 * x / d, 2.0 * y / d, (r2 - 1.0) / d};
}

ExtendedComplex inverse_stereographic(const Vec3& p) {
  if (p.z() <= 0.0) {
    const double s = 1.0 - p.z();
    return std::complex<double>(p.x() / s, p.y() / s);
  }
  // Near the north pole 1 - z cancels; on the sphere 1/(1 - z) = (1 + z)/(x^2 + y^2).
  const double r2 = p.x() * p.x() + p.y() * p.y();
  if (r2 == 0.0) return ExtendedComplex::infinity();
  const double s = (1.0 + p.z()) / r2;
  return std::complex<double>(p.x() * s, p.y() * s);
}

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

int count_flipped(const std::vector<Face>& faces, const SphericalEmbedding& emb) {
  int n = 0;
  for (const Face& f : faces) {
    n += !(spherical_triangle_area(emb.positions[f[0]], emb.positions[f[1]], emb.positions[f[2]]) > 0.0);
  }
  return n;
}

double total_signed_area(const std::vector<Face>& faces, const SphericalEmbedding& emb) {
  double total = 0;
  for (const Face& f : faces) {
    total += spherical_triangle_area(emb.positions[f[0]], emb.positions[f[1]], emb.positions[f[2]]);
  }
  return total;
}

Vec3 ball_mobius(const Vec3& a, const Vec3& x) {
  const double a2 = a.squaredNorm();
  const Vec3 d = x - a;
  Vec3 y = ((1.0 - a2) * d - d.squaredNorm() * a) / (1.0 - 2.0 * a.dot(x) + a2 * x.squaredNorm());
  return y.normalized();
}

Vec3 mass_center(const SphericalEmbedding& emb, const std::vector<double>& w) {
  if (w.size() != emb.positions.size()) {
    throw Error(ErrorKind::InvalidArgument, "normalize", "one weight per vertex is required");
  }
  Vec3 c = Vec3::Zero();
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    c += w[i] * emb.positions[i];
    total += w[i];
  }
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "normalize", "weights must have positive sum");
  return c / total;
}

SphericalEmbedding center_mass(const SphericalEmbedding& emb, const std::vector<double>& w,
                               const NormalizeOptions& opts, NormalizeReport* report) {
  SphericalEmbedding cur = emb;
  Vec3 c = mass_center(cur, w);
  double step = 1.0;
  int it = 0;
  for (; it < opts.max_iterations && c.norm() >= opts.tolerance; ++it) {
    SphericalEmbedding trial;
    trial.positions.resize(cur.positions.size());
    const Vec3 a = step * c;
    for (std::size_t i = 0; i < cur.positions.size(); ++i) trial.positions[i] = ball_mobius(a, cur.positions[i]);
    const Vec3 tc = mass_center(trial, w);
    if (tc.norm() < c.norm()) {
      cur = std::move(trial);
      c = tc;
      step = std::min(1.0, 2.0 * step);
    } else {
      step *= 0.5;
      if (step < 1e-12) break;
    }
  }
  if (report) *report = {it, c.norm()};
  if (!(c.norm() < opts.tolerance)) {
    throw Error(ErrorKind::Solver, "normalize",
                "mass centering did not converge (center norm " + std::to_string(c.norm()) + ")");
  }
  return cur;
}

namespace {

Eigen::Matrix3d rotation_between(const Vec3& from, const Vec3& to) {
  const Vec3 f = from.normalized(), t = to.normalized();
  const Vec3 axis = f.cross(t);
  const double s = axis.norm(), c = f.dot(t);
  if (s < 1e-15) {
    if (c > 0) return Eigen::Matrix3d::Identity();
    Vec3 ortho = std::abs(f.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    ortho = (ortho - ortho.dot(f) * f).normalized();
    return Eigen::AngleAxisd(M_PI, ortho).toRotationMatrix();
  }
  return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

}  // namespace

Eigen::Matrix3d landmark_rotation(const Vec3& top, const Vec3& front) {
  const Eigen::Matrix3d r1 = rotation_between(top, Vec3::UnitZ());
  const Vec3 f = r1 * front;
  if (std::hypot(f.x(), f.y()) < 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "normalize", "front landmark is parallel to the top landmark");
  }
  const Eigen::Matrix3d r2 = Eigen::AngleAxisd(-std::atan2(f.y(), f.x()), Vec3::UnitZ()).toRotationMatrix();
  return r2 * r1;
}

SphericalEmbedding rotate(const SphericalEmbedding& emb, const Eigen::Matrix3d& r) {
  SphericalEmbedding out;
  out.positions.reserve(emb.positions.size());
  for (const Vec3& p : emb.positions) out.positions.push_back((r * p).normalized());
  return out;
}

SphericalEmbedding mobius_normalize(const SphericalEmbedding& emb, const std::vector<double>& w, int top,
                                    int front, const NormalizeOptions& opts, NormalizeReport* report) {
  const int n = static_cast<int>(emb.positions.size());
  if (top < 0 || top >= n || front < 0 || front >= n || top == front) {
    throw Error(ErrorKind::InvalidArgument, "normalize", "landmarks must be two distinct vertices");
  }
  SphericalEmbedding centered = center_mass(emb, w, opts, report);
  SphericalEmbedding out = rotate(centered, landmark_rotation(centered.positions[top], centered.positions[front]));
  out.positions[top] = Vec3::UnitZ();
  return out;
}

Eigen::Matrix3d best_rotation(const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < p.size(); ++i) h += p[i] * q[i].transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) d(2, 2) = -1;
  return svd.matrixV() * d * svd.matrixU().transpose();
}

double rms_after_rotation(const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
  const Eigen::Matrix3d r = best_rotation(p, q);
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (r * p[i] - q[i]).squaredNorm();
  return std::sqrt(s / static_cast<double>(p.size()));
}

}  // namespace sphereflow
