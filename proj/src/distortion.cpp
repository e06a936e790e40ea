#include "sphereflow/distortion.hpp"

#include <algorithm>
#include <cmath>

#include "sphereflow/error.hpp"
#include "sphereflow/parallel.hpp"

namespace sphereflow {

namespace {

constexpr const char* kStage = "distortion";

void check_inputs(const HalfedgeMesh& source, const std::vector<Vec3>& image) {
  if (!source.has_positions()) throw Error(ErrorKind::InvalidArgument, kStage, "source mesh has no positions");
  if (static_cast<int>(image.size()) != source.num_vertices()) {
    throw Error(ErrorKind::InvalidArgument, kStage,
                "image has " + std::to_string(image.size()) + " vertices, source has " +
                    std::to_string(source.num_vertices()));
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * (b - a).cross(c - a).norm(); }

double total_area(const std::vector<Face>& faces, const std::vector<Vec3>& p) {
  double s = 0;
  for (const Face& f : faces) s += triangle_area(p[f[0]], p[f[1]], p[f[2]]);
  return s;
}

double area_scale(const HalfedgeMesh& source, const std::vector<Vec3>& image, const DistortionOptions& options) {
  if (!options.normalize_area) return 1.0;
  const double s = total_area(source.faces(), source.positions());
  const double i = total_area(source.faces(), image);
  if (!(s > 0.0) || !(i > 0.0)) throw Error(ErrorKind::Geometry, kStage, "zero total area");
  return i / s;
}

double corner_angle(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 u = a - p, v = b - p;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

// Edge vectors b - a and c - a in an orthonormal frame of the triangle.
Eigen::Matrix2d local_frame(const Vec3& a, const Vec3& b, const Vec3& c, Vec3* normal) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 n = e1.cross(e2);
  const double len = e1.norm(), nn = n.norm();
  if (!(len > 0.0) || !(nn > 0.0)) throw Error(ErrorKind::Geometry, kStage, "degenerate triangle");
  const Vec3 u1 = e1 / len, u2 = (n / nn).cross(u1);
  if (normal) *normal = n / nn;
  Eigen::Matrix2d m;
  m << len, e2.dot(u1), 0.0, e2.dot(u2);
  return m;
}

bool on_unit_sphere(const std::vector<Vec3>& p) {
  return std::all_of(p.begin(), p.end(), [](const Vec3& q) { return std::abs(q.norm() - 1.0) < 1e-6; });
}

}  // namespace

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw Error(ErrorKind::InvalidArgument, kStage, "histogram needs at least one bin");
  double r = 0;
  for (double v : values) r = std::max(r, std::abs(v));
  if (r == 0.0) r = 1.0;
  Histogram h;
  h.edges.resize(bins + 1);
  for (int k = 0; k <= bins; ++k) h.edges[k] = -r + 2.0 * r * k / bins;
  h.counts.assign(bins, 0);
  for (double v : values) {
    int k = static_cast<int>(std::floor((v + r) / (2.0 * r) * bins));
    ++h.counts[std::clamp(k, 0, bins - 1)];
  }
  return h;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  double var = 0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / values.size());
  return s;
}

DistortionSamples area_distortion(const HalfedgeMesh& source, const std::vector<Vec3>& image,
                                  const DistortionOptions& options) {
  check_inputs(source, image);
  const double k = area_scale(source, image, options);
  const auto& p = source.positions();
  std::vector<double> src(source.num_vertices(), 0.0), img(source.num_vertices(), 0.0);
  for (const Face& f : source.faces()) {
    const double a = triangle_area(p[f[0]], p[f[1]], p[f[2]]) * k;
    const double b = triangle_area(image[f[0]], image[f[1]], image[f[2]]);
    for (int v : f) src[v] += a, img[v] += b;
  }
  DistortionSamples out;
  out.values.resize(src.size());
  for (std::size_t v = 0; v < src.size(); ++v) {
    if (!(src[v] > 0.0)) throw Error(ErrorKind::Geometry, kStage, "vertex " + std::to_string(v) + " has no area");
    out.values[v] = std::log(img[v] / src[v]);
  }
  out.histogram = make_histogram(out.values);
  out.summary = summarize(out.values);
  return out;
}

DistortionSamples angle_distortion(const HalfedgeMesh& source, const std::vector<Vec3>& image) {
  check_inputs(source, image);
  const auto& p = source.positions();
  DistortionSamples out;
  out.values.resize(source.num_halfedges());
  for (int h = 0; h < source.num_halfedges(); ++h) {
    const int v = source.origin(h), a = source.target(h), b = source.opposite(h);
    const double s = corner_angle(p[v], p[a], p[b]);
    const double t = corner_angle(image[v], image[a], image[b]);
    if (!(s > 0.0) || !(t > 0.0)) {
      throw Error(ErrorKind::Geometry, kStage, "degenerate corner in face " + std::to_string(h / 3));
    }
    out.values[h] = std::log(t / s);
  }
  out.histogram = make_histogram(out.values);
  out.summary = summarize(out.values);
  return out;
}

JacobianStatistics jacobian_statistics(const HalfedgeMesh& source, const std::vector<Vec3>& image,
                                       const DistortionOptions& options) {
  check_inputs(source, image);
  const double k = std::sqrt(area_scale(source, image, options));
  const auto& p = source.positions();
  const int nf = source.num_faces();
  const bool sphere = on_unit_sphere(image);
  JacobianStatistics out;
  out.face_angle.resize(nf);
  out.face_area.resize(nf);
  out.sigma_max.resize(nf);
  out.sigma_min.resize(nf);
  std::vector<double> weight(nf);
  std::vector<char> flipped(nf, 0);
  parallel_for(nf, [&](std::size_t f) {
    const Face& t = source.face_vertices(static_cast<int>(f));
    Vec3 ns, ni;
    const Eigen::Matrix2d s = local_frame(p[t[0]], p[t[1]], p[t[2]], &ns) * k;
    const Eigen::Matrix2d i = local_frame(image[t[0]], image[t[1]], image[t[2]], &ni);
    const Vec3 ref = sphere ? Vec3(image[t[0]] + image[t[1]] + image[t[2]]) : ns;
    flipped[f] = ni.dot(ref) < 0.0;
    const Eigen::Matrix2d j = i * s.inverse();
    const double e = 0.5 * (j(0, 0) + j(1, 1)), g = 0.5 * (j(0, 0) - j(1, 1));
    const double q = 0.5 * (j(1, 0) + j(0, 1)), r = 0.5 * (j(1, 0) - j(0, 1));
    const double a = std::hypot(e, r), b = std::hypot(g, q);
    const double smax = a + b, smin = std::abs(a - b);
    if (!(smin > 0.0)) throw Error(ErrorKind::Geometry, kStage, "degenerate image of face " + std::to_string(f));
    out.sigma_max[f] = smax;
    out.sigma_min[f] = smin;
    out.face_angle[f] = smax / smin + smin / smax;
    out.face_area[f] = smax * smin + 1.0 / (smax * smin);
    weight[f] = 0.5 * std::abs(s.determinant());
  });
  double wsum = 0;
  for (int f = 0; f < nf; ++f) {
    out.angle_stat += weight[f] * out.face_angle[f];
    out.area_stat += weight[f] * out.face_area[f];
    wsum += weight[f];
    out.flipped_faces += flipped[f];
  }
  out.angle_stat /= wsum;
  out.area_stat /= wsum;
  return out;
}

DistortionReport distortion_report(const HalfedgeMesh& source, const std::vector<Vec3>& image,
                                   const DistortionOptions& options) {
  DistortionReport r;
  r.area = area_distortion(source, image, options);
  r.angle = angle_distortion(source, image);
  r.jacobian = jacobian_statistics(source, image, options);
  r.area_normalized = options.normalize_area;
  return r;
}

}  // namespace sphereflow
