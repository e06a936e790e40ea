#include "sphereflow/power_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "sphereflow/error.hpp"
#include "sphereflow/parallel.hpp"

namespace sphereflow {

double polygon_area(const Polygon& poly) {
  double a = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * a;
}

namespace {

// Sutherland-Hodgman against <n, q> <= c, carrying per-edge tags.
void clip_tagged(Polygon& poly, std::vector<int>& tags, const Vec2& n, double c, int new_tag) {
  const std::size_t m = poly.size();
  if (m == 0) return;
  std::vector<double> s(m);
  bool any_out = false;
  for (std::size_t k = 0; k < m; ++k) {
    s[k] = n.dot(poly[k]) - c;
    any_out = any_out || s[k] > 0;
  }
  if (!any_out) return;
  Polygon out;
  std::vector<int> out_tags;
  out.reserve(m + 1);
  out_tags.reserve(m + 1);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t l = (k + 1) % m;
    const bool in_k = s[k] <= 0, in_l = s[l] <= 0;
    if (in_k) {
      out.push_back(poly[k]);
      out_tags.push_back(tags[k]);
    }
    if (in_k != in_l) {
      const double t = s[k] / (s[k] - s[l]);
      out.push_back(poly[k] + t * (poly[l] - poly[k]));
      out_tags.push_back(in_k ? new_tag : tags[k]);
    }
  }
  if (out.size() < 3) out.clear(), out_tags.clear();
  poly = std::move(out);
  tags = std::move(out_tags);
}

}  // namespace

Polygon clip_polygon(const Polygon& polygon, const Vec2& normal, double offset) {
  Polygon p = polygon;
  std::vector<int> tags(p.size(), 0);
  clip_tagged(p, tags, normal, offset, 0);
  return p;
}

double power_distance(const Vec2& q, const Vec2& p, double weight) { return (p - q).squaredNorm() + weight; }

std::vector<double> power_weights_from_heights(const std::vector<Vec2>& y, const std::vector<double>& h) {
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = -2.0 * h[i] - y[i].squaredNorm();
  return w;
}

std::vector<double> heights_from_power_weights(const std::vector<Vec2>& y, const std::vector<double>& w) {
  std::vector<double> h(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) h[i] = -0.5 * (w[i] + y[i].squaredNorm());
  return h;
}

ConvexDomain ConvexDomain::box(const Vec2& lo, const Vec2& hi) {
  return {{lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())}};
}

ConvexDomain ConvexDomain::disk(double radius, int segments) {
  ConvexDomain d;
  for (int k = 0; k < segments; ++k) {
    const double a = 2.0 * M_PI * k / segments;
    d.boundary.emplace_back(radius * std::cos(a), radius * std::sin(a));
  }
  return d;
}

std::vector<int> PowerDiagram::empty_cells() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].empty()) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

using Real = long double;

// Incremental regular triangulation (lower hull of the lifted points) with
// Lawson flips, including the 3-to-1 flip that hides a vertex.
class RegularTriangulation {
 public:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // nb[i] lies across the edge opposite v[i]
    bool alive = true;
  };

  RegularTriangulation(const std::vector<Vec2>& pts, const std::vector<double>& w) : p_(pts), w_(w) {}

  std::vector<Tri> tris;
  std::vector<char> present;

  void build(int num_real) {
    const int n = static_cast<int>(p_.size());
    present.assign(n, 0);
    // Dummy corners are the last four points, counter-clockwise.
    const int d0 = n - 4;
    tris.push_back({{d0, d0 + 1, d0 + 2}, {-1, 1, -1}});
    tris.push_back({{d0, d0 + 2, d0 + 3}, {-1, -1, 0}});
    for (int i = 0; i < 4; ++i) present[d0 + i] = 1;
    last_ = 0;
    for (int idx : insertion_order(num_real)) insert(idx);
  }

 private:
  const std::vector<Vec2>& p_;
  const std::vector<double>& w_;
  int last_ = 0;
  std::uint64_t walk_seed_ = 0;

  Real orient(int a, int b, int c) const {
    const Real ax = p_[a].x(), ay = p_[a].y();
    return (Real(p_[b].x()) - ax) * (Real(p_[c].y()) - ay) - (Real(p_[b].y()) - ay) * (Real(p_[c].x()) - ax);
  }

  // > 0 when d lies below the plane through the lifted a, b, c (abc ccw).
  Real power_test(int a, int b, int c, int d) const {
    auto row = [&](int i, Real& x, Real& y, Real& z) {
      x = Real(p_[i].x()) - Real(p_[d].x());
      y = Real(p_[i].y()) - Real(p_[d].y());
      z = x * x + y * y + Real(w_[i]) - Real(w_[d]);
    };
    Real ax, ay, az, bx, by, bz, cx, cy, cz;
    row(a, ax, ay, az);
    row(b, bx, by, bz);
    row(c, cx, cy, cz);
    // Weighted in-circle determinant, lifted z = |q|^2 + w.
    return ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx);
  }

  std::vector<int> insertion_order(int num_real) const {
    // Morton order on a 2^16 grid keeps walks short.
    Vec2 lo = p_[0], hi = p_[0];
    for (int i = 0; i < num_real; ++i) lo = lo.cwiseMin(p_[i]), hi = hi.cwiseMax(p_[i]);
    const Vec2 span = (hi - lo).cwiseMax(Vec2(1e-300, 1e-300));
    auto spread = [](std::uint32_t x) {
      std::uint64_t v = x;
      v = (v | (v << 16)) & 0x0000FFFF0000FFFFull;
      v = (v | (v << 8)) & 0x00FF00FF00FF00FFull;
      v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0Full;
      v = (v | (v << 2)) & 0x3333333333333333ull;
      v = (v | (v << 1)) & 0x5555555555555555ull;
      return v;
    };
    std::vector<std::uint64_t> key(num_real);
    for (int i = 0; i < num_real; ++i) {
      const auto gx = static_cast<std::uint32_t>(std::min(65535.0, 65535.0 * (p_[i].x() - lo.x()) / span.x()));
      const auto gy = static_cast<std::uint32_t>(std::min(65535.0, 65535.0 * (p_[i].y() - lo.y()) / span.y()));
      key[i] = spread(gx) | (spread(gy) << 1);
    }
    std::vector<int> order(num_real);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
    return order;
  }

  static int index_of(const Tri& t, int v) {
    for (int i = 0; i < 3; ++i) {
      if (t.v[i] == v) return i;
    }
    return -1;
  }

  // Makes the neighbor of `t` across edge (a, b) point back to t.
  void relink(int nb, int a, int b, int t) {
    if (nb < 0) return;
    Tri& n = tris[nb];
    for (int i = 0; i < 3; ++i) {
      const int x = n.v[(i + 1) % 3], y = n.v[(i + 2) % 3];
      if ((x == a && y == b) || (x == b && y == a)) {
        n.nb[i] = t;
        return;
      }
    }
  }

  int neighbor_across(int t, int a, int b) const {
    const Tri& tr = tris[t];
    for (int i = 0; i < 3; ++i) {
      const int x = tr.v[(i + 1) % 3], y = tr.v[(i + 2) % 3];
      if ((x == a && y == b) || (x == b && y == a)) return tr.nb[i];
    }
    return -1;
  }

  // Triangle containing p; `zero_edge` is the index i whose opposite edge
  // holds p, or -1 for the interior.
  int locate(int p, int& zero_edge) {
    int t = last_;
    if (!tris[t].alive) {
      t = 0;
      while (!tris[t].alive) ++t;
    }
    const std::size_t limit = 4 * tris.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& tr = tris[t];
      const int start = static_cast<int>(walk_seed_++ % 3);
      bool moved = false;
      int zeros = 0, zi = -1;
      for (int r = 0; r < 3; ++r) {
        const int i = (start + r) % 3;
        const Real o = orient(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], p);
        if (o < 0) {
          t = tr.nb[i];
          moved = true;
          break;
        }
        if (o == 0) ++zeros, zi = i;
      }
      if (moved) {
        if (t < 0) break;
        continue;
      }
      zero_edge = zeros == 1 ? zi : -1;
      if (zeros >= 2) {
        throw Error(ErrorKind::InvalidArgument, "power diagram", "duplicate sites");
      }
      return t;
    }
    // Fallback: scan.
    for (int s = 0; s < static_cast<int>(tris.size()); ++s) {
      if (!tris[s].alive) continue;
      const Tri& tr = tris[s];
      int zeros = 0, zi = -1;
      bool inside = true;
      for (int i = 0; i < 3; ++i) {
        const Real o = orient(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], p);
        if (o < 0) inside = false;
        if (o == 0) ++zeros, zi = i;
      }
      if (inside) {
        if (zeros >= 2) throw Error(ErrorKind::InvalidArgument, "power diagram", "duplicate sites");
        zero_edge = zeros == 1 ? zi : -1;
        return s;
      }
    }
    throw Error(ErrorKind::Geometry, "power diagram", "point location failed");
  }

  int new_tri(std::array<int, 3> v, std::array<int, 3> nb) {
    tris.push_back({v, nb});
    return static_cast<int>(tris.size()) - 1;
  }

  void insert(int p) {
    int zero_edge = -1;
    const int t = locate(p, zero_edge);
    const Tri tr = tris[t];
    if (power_test(tr.v[0], tr.v[1], tr.v[2], p) <= 0) return;  // hidden
    std::vector<int> stack;
    if (zero_edge < 0) {
      const int a = tr.v[0], b = tr.v[1], c = tr.v[2];
      // t -> (p, b, c); new (p, c, a), (p, a, b).
      const int t1 = new_tri({p, c, a}, {tr.nb[1], -1, -1});
      const int t2 = new_tri({p, a, b}, {tr.nb[2], -1, -1});
      tris[t] = {{p, b, c}, {tr.nb[0], t1, t2}};
      tris[t1].nb = {tr.nb[1], t2, t};
      tris[t2].nb = {tr.nb[2], t, t1};
      relink(tr.nb[1], c, a, t1);
      relink(tr.nb[2], a, b, t2);
      stack = {t, t1, t2};
    } else {
      // p on the edge opposite v[zero_edge]; split both sides.
      const int i = zero_edge;
      const int c = tr.v[i], a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
      const int u = tr.nb[i];
      const int na = tr.nb[(i + 1) % 3], nbb = tr.nb[(i + 2) % 3];  // across (b,c) and (c,a)
      // (c, a, b) is ccw; both halves keep that orientation.
      const int t1 = new_tri({p, b, c}, {na, -1, -1});
      tris[t] = {{p, c, a}, {nbb, -1, -1}};
      relink(na, b, c, t1);
      std::vector<int> created = {t, t1};
      if (u >= 0) {
        const Tri ut = tris[u];
        int k = 0;
        for (; k < 3; ++k) {
          if (ut.v[k] != a && ut.v[k] != b) break;
        }
        const int d = ut.v[k];
        const int n_ad = neighbor_across(u, a, d), n_db = neighbor_across(u, d, b);
        const int u1 = new_tri({p, a, d}, {n_ad, -1, -1});
        tris[u] = {{p, d, b}, {n_db, -1, -1}};
        relink(n_ad, a, d, u1);
        // Links around p: t=(p,c,a), u1=(p,a,d), u=(p,d,b), t1=(p,b,c).
        tris[t].nb[1] = u1, tris[t].nb[2] = t1;
        tris[u1].nb[1] = u, tris[u1].nb[2] = t;
        tris[u].nb[1] = t1, tris[u].nb[2] = u1;
        tris[t1].nb[1] = t, tris[t1].nb[2] = u;
        created.push_back(u);
        created.push_back(u1);
      } else {
        tris[t].nb[1] = -1, tris[t].nb[2] = t1;
        tris[t1].nb[1] = t, tris[t1].nb[2] = -1;
      }
      stack = created;
    }
    present[p] = 1;
    last_ = t;
    legalize(p, stack);
  }

  void legalize(int p, std::vector<int>& stack) {
    std::size_t guard = 0;
    while (!stack.empty()) {
      if (++guard > 100000000) throw Error(ErrorKind::Geometry, "power diagram", "flip loop did not terminate");
      const int t = stack.back();
      stack.pop_back();
      if (!tris[t].alive) continue;
      const int i = index_of(tris[t], p);
      if (i < 0) continue;
      const int a = tris[t].v[(i + 1) % 3], b = tris[t].v[(i + 2) % 3];
      const int n = tris[t].nb[i];
      if (n < 0) continue;
      const Tri nt = tris[n];
      int k = 0;
      for (; k < 3; ++k) {
        if (nt.v[k] != a && nt.v[k] != b) break;
      }
      const int d = nt.v[k];
      if (!(power_test(p, a, b, d) > 0)) continue;
      const Real oa = orient(p, a, d), ob = orient(d, b, p);
      if (oa > 0 && ob > 0) {
        // 2-2 flip: (p,a,b),(b,a,d) -> (p,a,d),(p,d,b).
        const int n_ad = neighbor_across(n, a, d), n_db = neighbor_across(n, d, b);
        const int t_bp = tris[t].nb[(i + 1) % 3], t_pa = tris[t].nb[(i + 2) % 3];
        tris[t] = {{p, a, d}, {n_ad, n, t_pa}};
        tris[n] = {{p, d, b}, {n_db, t_bp, t}};
        relink(n_ad, a, d, t);
        relink(t_bp, b, p, n);
        last_ = t;
        stack.push_back(t);
        stack.push_back(n);
        continue;
      }
      // Reflex corner: hide it if its star is exactly three triangles.
      for (int side = 0; side < 2; ++side) {
        const int r = side == 0 ? a : b;
        if ((side == 0 ? oa : ob) > 0) continue;
        if (r >= static_cast<int>(present.size()) - 4) continue;  // dummy corner
        // Third triangle around r shares edge (p, r) with t and contains d.
        const int m = neighbor_across(t, p, r);
        if (m < 0) continue;
        const Tri mt = tris[m];
        if (index_of(mt, d) < 0 || index_of(mt, r) < 0 || index_of(mt, p) < 0) continue;
        // New triangle: the three vertices other than r, counter-clockwise.
        const int o = side == 0 ? b : a;  // the remaining vertex of edge ab
        std::array<int, 3> v = side == 0 ? std::array<int, 3>{p, d, o} : std::array<int, 3>{p, o, d};
        const int n_od = neighbor_across(n, o, d);
        const int t_op = neighbor_across(t, o, p);
        const int m_pd = neighbor_across(m, p, d);
        std::array<int, 3> nb{};
        for (int q = 0; q < 3; ++q) {
          const int x = v[(q + 1) % 3], y = v[(q + 2) % 3];
          auto same = [&](int s1, int s2) { return (x == s1 && y == s2) || (x == s2 && y == s1); };
          nb[q] = same(o, d) ? n_od : same(o, p) ? t_op : m_pd;
        }
        tris[n].alive = false;
        tris[m].alive = false;
        tris[t] = {v, nb};
        relink(n_od, o, d, t);
        relink(t_op, o, p, t);
        relink(m_pd, p, d, t);
        present[r] = 0;
        last_ = t;
        stack.push_back(t);
        break;
      }
    }
  }
};

}  // namespace

PowerDiagram power_diagram(const std::vector<Vec2>& sites, const std::vector<double>& weights,
                           const ConvexDomain& domain) {
  const int k = static_cast<int>(sites.size());
  if (static_cast<int>(weights.size()) != k) {
    throw Error(ErrorKind::InvalidArgument, "power diagram", "one weight per site is required");
  }
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "power diagram", "no sites");
  if (domain.boundary.size() < 3 || !(polygon_area(domain.boundary) > 0)) {
    throw Error(ErrorKind::InvalidArgument, "power diagram", "domain must be a counter-clockwise polygon");
  }
  double extent = 0, wmax = 0;
  for (int i = 0; i < k; ++i) {
    if (!sites[i].allFinite() || !std::isfinite(weights[i])) {
      throw Error(ErrorKind::InvalidArgument, "power diagram", "non-finite site or weight");
    }
    extent = std::max(extent, sites[i].cwiseAbs().maxCoeff());
    wmax = std::max(wmax, std::abs(weights[i]));
  }
  for (const Vec2& q : domain.boundary) extent = std::max(extent, q.cwiseAbs().maxCoeff());
  {
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return sites[a].x() < sites[b].x() || (sites[a].x() == sites[b].x() && sites[a].y() < sites[b].y());
    });
    for (int i = 1; i < k; ++i) {
      if (sites[order[i]] == sites[order[i - 1]]) {
        throw Error(ErrorKind::InvalidArgument, "power diagram", "duplicate sites");
      }
    }
  }

  // Dummy corners far enough that their cells never reach the domain.
  const double big = 8.0 * (2.0 * extent + std::sqrt(wmax)) + 1.0;
  std::vector<Vec2> pts = sites;
  std::vector<double> w = weights;
  for (const Vec2& c : {Vec2(-big, -big), Vec2(big, -big), Vec2(big, big), Vec2(-big, big)}) {
    pts.push_back(c);
    w.push_back(0.0);
  }
  RegularTriangulation rt(pts, w);
  rt.build(k);

  PowerDiagram out;
  out.hidden.assign(k, 0);
  std::vector<std::vector<int>> adj(k + 4);
  for (const auto& t : rt.tris) {
    if (!t.alive) continue;
    for (int i = 0; i < 3; ++i) {
      const int a = t.v[i], b = t.v[(i + 1) % 3];
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    if (t.v[0] < k && t.v[1] < k && t.v[2] < k) out.triangles.push_back(t.v);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  for (int i = 0; i < k; ++i) out.hidden[i] = !rt.present[i];

  out.cells.resize(k);
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (out.hidden[i]) return;
    std::vector<int> cand = adj[i];
    for (int j : adj[i]) cand.insert(cand.end(), adj[j].begin(), adj[j].end());
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    const Vec2 yi = pts[i];
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
      const double da = (pts[a] - yi).squaredNorm(), db = (pts[b] - yi).squaredNorm();
      return da < db || (da == db && a < b);
    });
    // Work relative to the site.
    Polygon poly;
    std::vector<int> tags;
    for (const Vec2& q : domain.boundary) {
      poly.push_back(q - yi);
      tags.push_back(-1);
    }
    for (int j : cand) {
      if (j == i) continue;
      const Vec2 d = pts[j] - yi;
      clip_tagged(poly, tags, 2.0 * d, d.squaredNorm() + w[j] - w[i], j);
      if (poly.empty()) break;
    }
    for (int t : tags) {
      if (t >= k) throw Error(ErrorKind::Geometry, "power diagram", "bounding corners reached the domain");
    }
    for (Vec2& q : poly) q += yi;
    out.cells[i].polygon = std::move(poly);
    out.cells[i].neighbors = std::move(tags);
  });
  return out;
}

void write_power_diagram_obj(const std::string& path, const PowerDiagram& diagram) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "power diagram", "cannot write " + path);
  f.precision(17);
  std::size_t base = 1;
  for (const auto& c : diagram.cells) {
    if (c.empty()) continue;
    for (const Vec2& q : c.polygon) f << "v " << q.x() << ' ' << q.y() << " 0\n";
    f << 'f';
    for (std::size_t i = 0; i < c.polygon.size(); ++i) f << ' ' << base + i;
    f << '\n';
    base += c.polygon.size();
  }
}

}  // namespace sphereflow
