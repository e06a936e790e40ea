#include "sphereflow/density.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "sphereflow/error.hpp"

namespace sphereflow {

namespace {

constexpr const char* kStage = "density";

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// 10-point Gauss-Legendre on [-1, 1].
constexpr double kGaussX[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244, 0.8650633666889845,
                               0.9739065285171717};
constexpr double kGaussW[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                               0.0666713443086881};

template <class V, class F>
V gauss10(const F& f, double a, double b) {
  const double m = 0.5 * (a + b), r = 0.5 * (b - a);
  V s = V::Zero();
  for (int i = 0; i < 5; ++i) s += kGaussW[i] * (f(m - r * kGaussX[i]) + f(m + r * kGaussX[i]));
  return r * s;
}

template <class V, class F>
V adaptive(const F& f, double a, double b, const V& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const V l = gauss10<V>(f, a, m), r = gauss10<V>(f, m, b);
  if (depth >= 20 || (l + r - whole).template lpNorm<Eigen::Infinity>() <= tol) return l + r;
  return adaptive<V>(f, a, m, l, 0.5 * tol, depth + 1) + adaptive<V>(f, m, b, r, 0.5 * tol, depth + 1);
}

// Pieces of at most `piece` length, each refined adaptively.
template <class V, class F>
V integrate_adaptive(const F& f, double a, double b, double tol, double piece = 0.3) {
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / piece)));
  V s = V::Zero();
  for (int k = 0; k < pieces; ++k) {
    const double x0 = a + (b - a) * k / pieces, x1 = a + (b - a) * (k + 1) / pieces;
    s += adaptive<V>(f, x0, x1, gauss10<V>(f, x0, x1), tol / pieces, 0);
  }
  return s;
}

// Inverse stereographic image of q (north pole at infinity) and its
// derivative along d.
Vec3 lift(const Vec2& q) {
  const double s = 1.0 + q.squaredNorm();
  return {2.0 * q.x() / s, 2.0 * q.y() / s, 1.0 - 2.0 / s};
}

Vec3 lift_derivative(const Vec2& q, const Vec2& d) {
  const double s = 1.0 + q.squaredNorm(), s2 = s * s;
  const double x = q.x(), y = q.y();
  const Vec3 dx(2.0 / s - 4.0 * x * x / s2, -4.0 * x * y / s2, 4.0 * x / s2);
  const Vec3 dy(-4.0 * x * y / s2, 2.0 / s - 4.0 * y * y / s2, 4.0 * y / s2);
  return d.x() * dx + d.y() * dy;
}

// int lift(q) rho_sph(q) dq over a counter-clockwise polygon: the lift
// reverses orientation, so the vector area is -1/2 of the loop integral of
// p x dp along the lifted boundary.
Vec3 spherical_lifted_moment(const Polygon& poly) {
  Vec3 out = Vec3::Zero();
  const std::size_t m = poly.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 a = poly[k], d = poly[(k + 1) % m] - a;
    if (d.squaredNorm() == 0.0) continue;
    auto f = [&](double t) -> Vec3 {
      const Vec2 q = a + t * d;
      return lift(q).cross(lift_derivative(q, d));
    };
    // Lifted arc length bounds the refinement pieces.
    const double reach = std::max(1.0, std::min(a.norm(), (a + d).norm()));
    const double piece = std::clamp(0.3 * reach / d.norm(), 1.0 / 64.0, 1.0);
    out -= 0.5 * integrate_adaptive<Vec3>(f, 0.0, 1.0, 1e-12 * (d.norm() / reach), piece);
  }
  return out;
}

// Seven-point degree-5 rule on a triangle, refined by four-way splits.
Vec3 triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c) {
  static constexpr double w[3] = {0.225, 0.132394152788506, 0.125939180544827};
  static constexpr double a1 = 0.059715871789770, b1 = 0.470142064105115;
  static constexpr double a2 = 0.797426985353087, b2 = 0.101286507323456;
  auto at = [&](double l0, double l1, double l2) { return lift(l0 * a + l1 * b + l2 * c); };
  Vec3 s = w[0] * at(1.0 / 3, 1.0 / 3, 1.0 / 3);
  s += w[1] * (at(a1, b1, b1) + at(b1, a1, b1) + at(b1, b1, a1));
  s += w[2] * (at(a2, b2, b2) + at(b2, a2, b2) + at(b2, b2, a2));
  return 0.5 * cross(b - a, c - a) * s;
}

Vec3 triangle_lifted(const Vec2& a, const Vec2& b, const Vec2& c, const Vec3& whole, double tol, int depth) {
  const Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  const Vec3 t0 = triangle_rule(a, ab, ca), t1 = triangle_rule(ab, b, bc), t2 = triangle_rule(ca, bc, c),
             t3 = triangle_rule(ab, bc, ca);
  const Vec3 sum = t0 + t1 + t2 + t3;
  if (depth >= 6 || (sum - whole).lpNorm<Eigen::Infinity>() <= tol) return sum;
  const double q = 0.25 * tol;
  return triangle_lifted(a, ab, ca, t0, q, depth + 1) + triangle_lifted(ab, b, bc, t1, q, depth + 1) +
         triangle_lifted(ca, bc, c, t2, q, depth + 1) + triangle_lifted(ab, bc, ca, t3, q, depth + 1);
}

// int lift(q) dq over a convex polygon.
Vec3 flat_lifted_moment(const Polygon& poly) {
  Vec3 out = Vec3::Zero();
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    const double area = 0.5 * std::abs(cross(poly[k] - poly[0], poly[k + 1] - poly[0]));
    if (area == 0.0) continue;
    out += triangle_lifted(poly[0], poly[k], poly[k + 1], triangle_rule(poly[0], poly[k], poly[k + 1]),
                           1e-11 * area, 0);
  }
  return out;
}

// Radial mass profile: integral of rho r^2 dr from 0 to R.
double radial_moment(double r) {
  if (!std::isfinite(r)) return M_PI;
  if (r < 0.1) {
    double s = 0, p = r * r * r;
    const double r2 = r * r;
    for (int k = 1; k <= 9; ++k) {
      s += (k % 2 ? 2.0 : -2.0) * (2.0 * k / (2.0 * k + 1.0)) * p;
      p *= r2;
    }
    return s;
  }
  return 2.0 * (std::atan(r) - r / (1.0 + r * r));
}

// Spherical-density integrals over a convex polygon by fans from the origin.
DensityIntegrals spherical_polygon(const Polygon& poly, bool with_moment) {
  DensityIntegrals out;
  const std::size_t m = poly.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2& a = poly[k];
    const Vec2& b = poly[(k + 1) % m];
    const Vec2 e = b - a;
    const double len = e.norm();
    if (len == 0.0) continue;
    const Vec2 u = e / len;
    const double h = cross(a, b) / len;
    const double sa = a.dot(u), sb = b.dot(u);
    const double c = std::sqrt(1.0 + h * h);
    out.mass += 2.0 * h / c * (std::atan(sb / c) - std::atan(sa / c));
    if (with_moment && std::abs(h) > 1e-15 * len) {
      const double ah = std::abs(h), sigma = h > 0 ? 1.0 : -1.0;
      const Vec2 foot = a - sa * u;
      const double phi0 = std::atan2(foot.y(), foot.x());
      const double pa = std::atan2(sa, ah), pb = std::atan2(sb, ah);
      auto f = [&](double psi) -> Vec2 {
        const double th = phi0 + sigma * psi;
        const double g = radial_moment(ah / std::cos(psi));
        return {g * std::cos(th), g * std::sin(th)};
      };
      out.moment += sigma * integrate_adaptive<Vec2>(f, pa, pb, 1e-14 * (1.0 + std::abs(pb - pa)));
    }
  }
  return out;
}

double spherical_segment(const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const double len = e.norm();
  if (len == 0.0) return 0.0;
  const Vec2 u = e / len;
  const double h = cross(a, b) / len;
  const double c2 = 1.0 + h * h, c = std::sqrt(c2);
  auto anti = [&](double s) { return 2.0 * s / (c2 * (c2 + s * s)) + 2.0 * std::atan(s / c) / (c2 * c); };
  return anti(b.dot(u)) - anti(a.dot(u));
}

Polygon clip_to_triangle(Polygon poly, const std::array<Vec2, 3>& t) {
  for (int k = 0; k < 3 && !poly.empty(); ++k) {
    const Vec2 a = t[k], e = t[(k + 1) % 3] - a;
    const Vec2 n(e.y(), -e.x());
    poly = clip_polygon(poly, n, n.dot(a));
  }
  return poly;
}

// Parameter interval of a + s (b - a) inside triangle t; `weight` receives
// 1/2 when the segment runs along an edge of t.
bool segment_in_triangle(const Vec2& a, const Vec2& b, const std::array<Vec2, 3>& t, double& s0, double& s1,
                         double& weight) {
  s0 = 0, s1 = 1, weight = 1;
  for (int k = 0; k < 3; ++k) {
    const Vec2 p = t[k], e = t[(k + 1) % 3] - p;
    const double alpha = cross(e, a - p), beta = cross(e, b - p) - alpha;
    const double eps = 1e-12 * e.norm() * std::max((a - p).norm(), (b - p).norm());
    if (std::abs(alpha) <= eps && std::abs(alpha + beta) <= eps) {
      weight = 0.5;
      continue;
    }
    // alpha + beta s >= 0
    if (beta == 0.0) {
      if (alpha < 0) return false;
      continue;
    }
    const double r = -alpha / beta;
    if (beta > 0) s0 = std::max(s0, r);
    else s1 = std::min(s1, r);
  }
  return s1 > s0;
}

DensityIntegrals polygon_moments(const Polygon& poly, const Vec2& ref) {
  DensityIntegrals out;
  const std::size_t m = poly.size();
  double a = 0;
  Vec2 c = Vec2::Zero();
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 p = poly[k] - ref, q = poly[(k + 1) % m] - ref;
    const double x = cross(p, q);
    a += x;
    c += (p + q) * x;
  }
  out.mass = 0.5 * a;
  out.moment = c / 6.0 + out.mass * ref;
  return out;
}

struct Box {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  void add(const Vec2& p) { lo = lo.cwiseMin(p), hi = hi.cwiseMax(p); }
  void add(const Box& b) { lo = lo.cwiseMin(b.lo), hi = hi.cwiseMax(b.hi); }
  bool overlaps(const Box& b) const {
    return lo.x() <= b.hi.x() && b.lo.x() <= hi.x() && lo.y() <= b.hi.y() && b.lo.y() <= hi.y();
  }
};

}  // namespace

// Triangles with values and a bounding-box tree over them.
struct SourceDensity::TriangleSet {
  std::vector<std::array<Vec2, 3>> tris;
  std::vector<double> values;
  std::vector<Box> boxes;
  struct Node {
    Box box;
    int left = -1, right = -1, begin = 0, end = 0;
  };
  std::vector<Node> nodes;
  std::vector<int> order;

  void build() {
    boxes.resize(tris.size());
    for (std::size_t i = 0; i < tris.size(); ++i) {
      for (const Vec2& p : tris[i]) boxes[i].add(p);
    }
    order.resize(tris.size());
    std::iota(order.begin(), order.end(), 0);
    if (!tris.empty()) build_node(0, static_cast<int>(tris.size()));
  }

  int build_node(int begin, int end) {
    Node node;
    node.begin = begin, node.end = end;
    for (int i = begin; i < end; ++i) node.box.add(boxes[order[i]]);
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(node);
    if (end - begin <= 4) return id;
    const Vec2 ext = node.box.hi - node.box.lo;
    const int axis = ext.x() >= ext.y() ? 0 : 1;
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end, [&](int a, int b) {
      return boxes[a].lo[axis] + boxes[a].hi[axis] < boxes[b].lo[axis] + boxes[b].hi[axis];
    });
    const int l = build_node(begin, mid);
    const int r = build_node(mid, end);
    nodes[id].left = l, nodes[id].right = r;
    return id;
  }

  template <class F>
  void query(const Box& b, F&& visit) const {
    if (nodes.empty()) return;
    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top) {
      const Node& n = nodes[stack[--top]];
      if (!n.box.overlaps(b)) continue;
      if (n.left < 0) {
        for (int i = n.begin; i < n.end; ++i) {
          if (boxes[order[i]].overlaps(b)) visit(order[i]);
        }
      } else {
        stack[top++] = n.left;
        stack[top++] = n.right;
      }
    }
  }
};

double spherical_density(const Vec2& q) {
  const double d = 1.0 + q.squaredNorm();
  return 4.0 / (d * d);
}

double spherical_tail_mass(double radius) { return 4.0 * M_PI / (1.0 + radius * radius); }

SourceDensity SourceDensity::spherical(double scale) {
  if (!(scale >= 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "density scale must be nonnegative");
  SourceDensity d;
  d.spherical_scale_ = scale;
  return d;
}

SourceDensity SourceDensity::piecewise_constant(const std::vector<Vec2>& vertices, const std::vector<Face>& faces,
                                                const std::vector<double>& values) {
  if (values.size() != faces.size()) {
    throw Error(ErrorKind::InvalidArgument, kStage, "one density value per triangle is required");
  }
  auto set = std::make_shared<TriangleSet>();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    std::array<Vec2, 3> t;
    for (int c = 0; c < 3; ++c) {
      const int v = faces[f][c];
      if (v < 0 || v >= static_cast<int>(vertices.size())) {
        throw Error(ErrorKind::InvalidArgument, kStage, "triangle vertex out of range");
      }
      t[c] = vertices[v];
    }
    if (!(cross(t[1] - t[0], t[2] - t[0]) > 0.0)) {
      throw Error(ErrorKind::Geometry, kStage, "density triangle " + std::to_string(f) + " is not counter-clockwise");
    }
    if (!(values[f] >= 0.0) || !std::isfinite(values[f])) {
      throw Error(ErrorKind::InvalidArgument, kStage, "density values must be finite and nonnegative");
    }
    set->tris.push_back(t);
    set->values.push_back(values[f]);
  }
  set->build();
  SourceDensity d;
  d.triangles_.emplace_back(1.0, std::move(set));
  return d;
}

SourceDensity SourceDensity::pushforward(const std::vector<Vec2>& planar, const std::vector<Face>& faces,
                                         const std::vector<double>& face_masses) {
  if (face_masses.size() != faces.size()) {
    throw Error(ErrorKind::InvalidArgument, kStage, "one mass per face is required");
  }
  std::vector<Face> kept;
  std::vector<double> values;
  std::vector<char> regular(faces.size(), 0);
  double outside_mass = 0;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int v : faces[f]) {
      if (v < 0 || v >= static_cast<int>(planar.size())) {
        throw Error(ErrorKind::InvalidArgument, kStage, "triangle vertex out of range");
      }
    }
    const Vec2 &a = planar[faces[f][0]], &b = planar[faces[f][1]], &c = planar[faces[f][2]];
    const double area = 0.5 * cross(b - a, c - a);
    if (area > 0) {
      kept.push_back(faces[f]);
      values.push_back(face_masses[f] / area);
      regular[f] = 1;
    } else {
      outside_mass += face_masses[f];
    }
  }
  if (kept.size() == faces.size()) {
    throw Error(ErrorKind::Geometry, kStage, "no image triangle covers the point at infinity");
  }
  SourceDensity d = piecewise_constant(planar, kept, values);
  auto region = d.triangles_.front().second;

  // Boundary of the union: edges of kept faces whose other side is not kept.
  std::map<std::pair<int, int>, int> directed;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int c = 0; c < 3; ++c) directed[{faces[f][c], faces[f][(c + 1) % 3]}] = static_cast<int>(f);
  }
  double inner = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!regular[f]) continue;
    for (int c = 0; c < 3; ++c) {
      const int u = faces[f][c], v = faces[f][(c + 1) % 3];
      auto it = directed.find({v, u});
      if (it != directed.end() && regular[it->second]) continue;
      const Vec2 &a = planar[u], &b = planar[v];
      const Vec2 e = b - a;
      const double s = std::clamp(-a.dot(e) / e.squaredNorm(), 0.0, 1.0);
      inner = std::min(inner, (a + s * e).norm());
    }
  }
  if (!std::isfinite(inner) || d.value(Vec2::Zero()) <= 0.0) inner = 0.0;

  const double covered = [&] {
    double m = 0;
    for (const auto& t : region->tris) m += spherical_polygon({t[0], t[1], t[2]}, false).mass;
    return m;
  }();
  const double free_mass = 4.0 * M_PI - covered;
  if (!(free_mass > 0.0)) throw Error(ErrorKind::Geometry, kStage, "image triangles overlap");
  d.exterior_.push_back({outside_mass / free_mass, region, inner});
  return d;
}

SourceDensity SourceDensity::combine(double a, const SourceDensity& x, double b, const SourceDensity& y) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw Error(ErrorKind::InvalidArgument, kStage, "mixture weights must be nonnegative");
  SourceDensity d;
  d.spherical_scale_ = a * x.spherical_scale_ + b * y.spherical_scale_;
  for (const auto& [s, set] : x.triangles_) {
    if (a * s > 0) d.triangles_.emplace_back(a * s, set);
  }
  for (const auto& [s, set] : y.triangles_) {
    if (b * s > 0) d.triangles_.emplace_back(b * s, set);
  }
  for (const auto& e : x.exterior_) {
    if (a * e.scale > 0) d.exterior_.push_back({a * e.scale, e.region, e.inner_radius});
  }
  for (const auto& e : y.exterior_) {
    if (b * e.scale > 0) d.exterior_.push_back({b * e.scale, e.region, e.inner_radius});
  }
  return d;
}

namespace {

bool in_triangle(const std::array<Vec2, 3>& t, const Vec2& q) {
  return cross(t[1] - t[0], q - t[0]) >= 0 && cross(t[2] - t[1], q - t[1]) >= 0 && cross(t[0] - t[2], q - t[2]) >= 0;
}

}  // namespace

double SourceDensity::value(const Vec2& q) const {
  double v = spherical_scale_ * spherical_density(q);
  Box b;
  b.add(q);
  auto locate = [&](const TriangleSet& set) {
    int found = -1;
    set.query(b, [&](int i) {
      if (found < 0 && in_triangle(set.tris[i], q)) found = i;
    });
    return found;
  };
  for (const auto& [s, set] : triangles_) {
    const int i = locate(*set);
    if (i >= 0) v += s * set->values[i];
  }
  for (const auto& e : exterior_) {
    if (q.norm() > e.inner_radius && locate(*e.region) < 0) v += e.scale * spherical_density(q);
  }
  return v;
}

DensityIntegrals SourceDensity::integrate(const Polygon& poly, bool with_moment) const {
  DensityIntegrals out;
  if (poly.size() < 3) return out;
  if (spherical_scale_ > 0) {
    const auto s = spherical_polygon(poly, with_moment);
    out.mass += spherical_scale_ * s.mass;
    out.moment += spherical_scale_ * s.moment;
  }
  Box b;
  double reach = 0;
  for (const Vec2& p : poly) b.add(p), reach = std::max(reach, p.norm());
  for (const auto& [s, set] : triangles_) {
    set->query(b, [&](int i) {
      const Polygon piece = clip_to_triangle(poly, set->tris[i]);
      if (piece.size() < 3) return;
      const auto m = polygon_moments(piece, set->tris[i][0]);
      out.mass += s * set->values[i] * m.mass;
      if (with_moment) out.moment += s * set->values[i] * m.moment;
    });
  }
  for (const auto& e : exterior_) {
    if (reach <= e.inner_radius) continue;
    DensityIntegrals part = spherical_polygon(poly, with_moment);
    e.region->query(b, [&](int i) {
      const Polygon piece = clip_to_triangle(poly, e.region->tris[i]);
      if (piece.size() < 3) return;
      const auto m = spherical_polygon(piece, with_moment);
      part.mass -= m.mass;
      part.moment -= m.moment;
    });
    out.mass += e.scale * std::max(0.0, part.mass);
    if (with_moment) out.moment += e.scale * part.moment;
  }
  if (!with_moment) out.moment.setZero();
  return out;
}

double SourceDensity::line_integral(const Vec2& a, const Vec2& b) const {
  double v = 0;
  if (spherical_scale_ > 0) v += spherical_scale_ * spherical_segment(a, b);
  const double len = (b - a).norm();
  Box box;
  box.add(a);
  box.add(b);
  for (const auto& [s, set] : triangles_) {
    set->query(box, [&](int i) {
      double s0, s1, w;
      if (segment_in_triangle(a, b, set->tris[i], s0, s1, w)) v += s * w * set->values[i] * (s1 - s0) * len;
    });
  }
  for (const auto& e : exterior_) {
    if (std::max(a.norm(), b.norm()) <= e.inner_radius) continue;
    double part = spherical_segment(a, b);
    e.region->query(box, [&](int i) {
      double s0, s1, w;
      if (segment_in_triangle(a, b, e.region->tris[i], s0, s1, w)) {
        part -= w * spherical_segment(a + s0 * (b - a), a + s1 * (b - a));
      }
    });
    v += e.scale * std::max(0.0, part);
  }
  return v;
}

Vec3 SourceDensity::lifted_moment(const Polygon& poly) const {
  Vec3 out = Vec3::Zero();
  if (poly.size() < 3) return out;
  if (spherical_scale_ > 0) out += spherical_scale_ * spherical_lifted_moment(poly);
  Box b;
  double reach = 0;
  for (const Vec2& p : poly) b.add(p), reach = std::max(reach, p.norm());
  for (const auto& [s, set] : triangles_) {
    set->query(b, [&](int i) {
      const Polygon piece = clip_to_triangle(poly, set->tris[i]);
      if (piece.size() >= 3) out += s * set->values[i] * flat_lifted_moment(piece);
    });
  }
  for (const auto& e : exterior_) {
    if (reach <= e.inner_radius) continue;
    Vec3 part = spherical_lifted_moment(poly);
    e.region->query(b, [&](int i) {
      const Polygon piece = clip_to_triangle(poly, e.region->tris[i]);
      if (piece.size() >= 3) part -= spherical_lifted_moment(piece);
    });
    out += e.scale * part;
  }
  return out;
}

double SourceDensity::total_mass() const {
  double m = 4.0 * M_PI * spherical_scale_;
  for (const auto& [s, set] : triangles_) {
    for (std::size_t i = 0; i < set->tris.size(); ++i) {
      const auto& t = set->tris[i];
      m += s * set->values[i] * 0.5 * cross(t[1] - t[0], t[2] - t[0]);
    }
  }
  for (const auto& e : exterior_) {
    double covered = 0;
    for (const auto& t : e.region->tris) covered += spherical_polygon({t[0], t[1], t[2]}, false).mass;
    m += e.scale * (4.0 * M_PI - covered);
  }
  return m;
}

SourceDensity interpolate_density(double t, const SourceDensity& conformal, const SourceDensity& spherical) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, kStage, "t must lie in [0, 1]");
  const double mc = conformal.total_mass();
  const double ms = spherical.total_mass();
  if (std::abs(mc - ms) > 1e-6 * std::max(mc, ms)) {
    throw Error(ErrorKind::InvalidArgument, kStage,
                "density masses differ (" + std::to_string(mc) + " vs " + std::to_string(ms) + ")");
  }
  return SourceDensity::combine(1.0 - t, spherical, t, conformal);
}

}  // namespace sphereflow
