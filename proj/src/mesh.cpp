#include "sphereflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <cstdint>
#include <unordered_map>

#include "sphereflow/error.hpp"

namespace sphereflow {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

HalfedgeMesh HalfedgeMesh::build(std::size_t num_vertices, std::vector<Face> faces,
                                 std::vector<Vec3> positions) {
  const std::string stage = "mesh";
  if (!positions.empty() && positions.size() != num_vertices) {
    throw Error(ErrorKind::InvalidArgument, stage, "position count does not match vertex count");
  }
  const int nv = static_cast<int>(num_vertices);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    for (int v : t) {
      if (v < 0 || v >= nv) {
        throw Error(ErrorKind::InvalidArgument, stage,
                    "face " + std::to_string(f) + " references vertex out of range");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) {
      throw Error(ErrorKind::Topology, stage, "face " + std::to_string(f) + " repeats a vertex");
    }
  }

  HalfedgeMesh mesh;
  mesh.faces_ = std::move(faces);
  mesh.positions_ = std::move(positions);
  const int nh = mesh.num_halfedges();

  std::unordered_map<std::uint64_t, int> undirected_count;
  undirected_count.reserve(static_cast<std::size_t>(nh));
  for (int h = 0; h < nh; ++h) {
    int a = mesh.origin(h), b = mesh.target(h);
    if (++undirected_count[edge_key(std::min(a, b), std::max(a, b))] > 2) {
      throw Error(ErrorKind::Topology, stage,
                  "non-manifold edge (" + std::to_string(std::min(a, b)) + ", " +
                      std::to_string(std::max(a, b)) + ") has more than 2 incident faces");
    }
  }

  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(static_cast<std::size_t>(nh));
  for (int h = 0; h < nh; ++h) {
    auto [it, inserted] = directed.emplace(edge_key(mesh.origin(h), mesh.target(h)), h);
    if (!inserted) {
      throw Error(ErrorKind::Topology, stage,
                  "inconsistent orientation at edge (" + std::to_string(mesh.origin(h)) + ", " +
                      std::to_string(mesh.target(h)) + ")");
    }
  }

  mesh.twin_.assign(nh, -1);
  mesh.edge_.assign(nh, -1);
  for (int h = 0; h < nh; ++h) {
    if (mesh.edge_[h] >= 0) continue;
    auto it = directed.find(edge_key(mesh.target(h), mesh.origin(h)));
    int e = static_cast<int>(mesh.edge_halfedge_.size());
    mesh.edge_halfedge_.push_back(h);
    mesh.edge_[h] = e;
    if (it != directed.end()) {
      mesh.twin_[h] = it->second;
      mesh.twin_[it->second] = h;
      mesh.edge_[it->second] = e;
    }
  }

  // Manifold vertices: one fan, at most one outgoing boundary halfedge.
  std::vector<int> out_degree(nv, 0), boundary_out(nv, 0);
  mesh.vertex_halfedge_.assign(nv, -1);
  for (int h = 0; h < nh; ++h) {
    int v = mesh.origin(h);
    ++out_degree[v];
    if (mesh.twin_[h] < 0) {
      ++boundary_out[v];
      mesh.vertex_halfedge_[v] = h;
    } else if (mesh.vertex_halfedge_[v] < 0) {
      mesh.vertex_halfedge_[v] = h;
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (out_degree[v] == 0) {
      throw Error(ErrorKind::Topology, stage, "isolated vertex " + std::to_string(v));
    }
    if (boundary_out[v] > 1) {
      throw Error(ErrorKind::Topology, stage, "non-manifold vertex " + std::to_string(v));
    }
    if (static_cast<int>(mesh.outgoing_halfedges(v).size()) != out_degree[v]) {
      throw Error(ErrorKind::Topology, stage, "non-manifold vertex " + std::to_string(v));
    }
  }
  return mesh;
}

bool HalfedgeMesh::is_closed() const {
  return std::none_of(twin_.begin(), twin_.end(), [](int t) { return t < 0; });
}

std::vector<int> HalfedgeMesh::outgoing_halfedges(int v) const {
  std::vector<int> out;
  const int start = vertex_halfedge_[v];
  if (start < 0) return out;
  int h = start;
  do {
    out.push_back(h);
    int t = twin_[prev(h)];
    if (t < 0) break;
    h = t;
  } while (h != start && out.size() <= twin_.size());
  return out;
}

std::vector<int> HalfedgeMesh::vertex_neighbors(int v) const {
  std::vector<int> out;
  auto hs = outgoing_halfedges(v);
  for (int h : hs) out.push_back(target(h));
  if (!hs.empty() && is_boundary_vertex(v)) out.push_back(origin(prev(hs.back())));
  return out;
}

std::vector<std::vector<int>> HalfedgeMesh::boundary_loops() const {
  std::vector<std::vector<int>> loops;
  std::vector<char> seen(twin_.size(), 0);
  for (int h0 = 0; h0 < num_halfedges(); ++h0) {
    if (twin_[h0] >= 0 || seen[h0]) continue;
    std::vector<int> loop;
    int h = h0;
    while (!seen[h]) {
      seen[h] = 1;
      loop.push_back(origin(h));
      int g = next(h);
      while (twin_[g] >= 0) g = next(twin_[g]);
      h = g;
    }
    std::rotate(loop.begin(), std::min_element(loop.begin(), loop.end()), loop.end());
    loops.push_back(std::move(loop));
  }
  std::sort(loops.begin(), loops.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return loops;
}

void HalfedgeMesh::fix_vertex_halfedge(int v) {
  // The caller seeds vertex_halfedge_[v] with any valid outgoing slot; rotate
  // to the boundary one if it exists.
  const int start = vertex_halfedge_[v];
  int h = start;
  for (;;) {
    if (twin_[h] < 0) {
      vertex_halfedge_[v] = h;
      return;
    }
    h = next(twin_[h]);
    if (h == start) {
      vertex_halfedge_[v] = start;
      return;
    }
  }
}

void HalfedgeMesh::flip(int e) {
  const int h = edge_halfedge_[e];
  const int t = twin_[h];
  if (t < 0) throw Error(ErrorKind::InvalidArgument, "flip", "cannot flip a boundary edge");
  const int f = face(h), g = face(t);
  const int a = origin(h), b = target(h), c = opposite(h), d = opposite(t);
  if (c == d) throw Error(ErrorKind::Geometry, "flip", "flip would create a degenerate edge");

  const int x1 = twin_[next(h)], x2 = twin_[prev(h)], x3 = twin_[next(t)], x4 = twin_[prev(t)];
  const int e1 = edge_[next(h)], e2 = edge_[prev(h)], e3 = edge_[next(t)], e4 = edge_[prev(t)];

  faces_[f] = {d, b, c};
  faces_[g] = {c, a, d};
  const int f0 = 3 * f, g0 = 3 * g;
  auto link = [&](int slot, int other, int edge_id) {
    twin_[slot] = other;
    edge_[slot] = edge_id;
    if (other >= 0) twin_[other] = slot;
    edge_halfedge_[edge_id] = slot;
  };
  link(f0 + 0, x4, e4);
  link(f0 + 1, x1, e1);
  link(g0 + 0, x2, e2);
  link(g0 + 1, x3, e3);
  twin_[f0 + 2] = g0 + 2;
  twin_[g0 + 2] = f0 + 2;
  edge_[f0 + 2] = e;
  edge_[g0 + 2] = e;
  edge_halfedge_[e] = f0 + 2;

  vertex_halfedge_[d] = f0 + 0;
  vertex_halfedge_[b] = f0 + 1;
  vertex_halfedge_[c] = g0 + 0;
  vertex_halfedge_[a] = g0 + 1;
  for (int v : {a, b, c, d}) fix_vertex_halfedge(v);
}

void HalfedgeMesh::set_positions(std::vector<Vec3> positions) {
  if (positions.size() != vertex_halfedge_.size()) {
    throw Error(ErrorKind::InvalidArgument, "mesh", "position count does not match vertex count");
  }
  positions_ = std::move(positions);
}

int HalfedgeMesh::num_components() const {
  std::vector<int> parent(vertex_halfedge_.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const Face& t : faces_) {
    int r0 = find_root(parent, t[0]);
    for (int k = 1; k < 3; ++k) {
      int r = find_root(parent, t[k]);
      if (r != r0) parent[r] = r0;
    }
  }
  int count = 0;
  for (int v = 0; v < num_vertices(); ++v) count += find_root(parent, v) == v;
  return count;
}

double CurvatureField::total() const {
  // Pairwise-free but ordered summation keeps results reproducible.
  long double s = 0;
  for (double k : values) s += k;
  return static_cast<double>(s);
}

DiscreteMetric euclidean_metric(const HalfedgeMesh& mesh) {
  if (!mesh.has_positions()) {
    throw Error(ErrorKind::InvalidArgument, "mesh", "mesh has no positions");
  }
  DiscreteMetric metric;
  metric.lengths.resize(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto [a, b] = mesh.edge_vertices(e);
    metric.lengths[e] = (mesh.position(a) - mesh.position(b)).norm();
  }
  return metric;
}

bool satisfies_triangle_inequality(double a, double b, double c) {
  return a > 0 && b > 0 && c > 0 && a < b + c && b < c + a && c < a + b;
}

double angle_opposite(double a, double b, double c) {
  // tan(A/2) = sqrt((s-b)(s-c) / (s(s-a)))
  const double sa = 0.5 * (b + c - a);
  const double sb = 0.5 * (a - b + c);
  const double sc = 0.5 * (a + b - c);
  const double s = 0.5 * (a + b + c);
  return 2.0 * std::atan2(std::sqrt(sb * sc), std::sqrt(s * sa));
}

namespace {

std::array<double, 3> face_lengths(const HalfedgeMesh& mesh, const DiscreteMetric& metric, int f) {
  // l[c] is the length of the halfedge leaving corner c.
  return {metric[mesh.edge(3 * f)], metric[mesh.edge(3 * f + 1)], metric[mesh.edge(3 * f + 2)]};
}

double heron(double a, double b, double c) {
  std::array<double, 3> s{a, b, c};
  std::sort(s.begin(), s.end(), std::greater<>());
  a = s[0], b = s[1], c = s[2];
  double p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  return 0.25 * std::sqrt(std::max(p, 0.0));
}

}  // namespace

CornerAngles corner_angles(const HalfedgeMesh& mesh, const DiscreteMetric& metric) {
  CornerAngles out;
  out.angles.resize(mesh.num_halfedges());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    auto l = face_lengths(mesh, metric, f);
    if (!satisfies_triangle_inequality(l[0], l[1], l[2])) {
      throw Error(ErrorKind::Geometry, "metric",
                  "triangle inequality violated on face " + std::to_string(f));
    }
    // The corner at c faces the halfedge leaving corner c+1.
    for (int c = 0; c < 3; ++c) {
      out.angles[3 * f + c] = angle_opposite(l[(c + 1) % 3], l[(c + 2) % 3], l[c]);
    }
  }
  return out;
}

CurvatureField vertex_curvature(const HalfedgeMesh& mesh, const CornerAngles& angles) {
  CurvatureField k;
  k.values.resize(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    k.values[v] = mesh.is_boundary_vertex(v) ? kPi : 2.0 * kPi;
  }
  for (int h = 0; h < mesh.num_halfedges(); ++h) k.values[mesh.origin(h)] -= angles[h];
  return k;
}

double gauss_bonnet_residual(const HalfedgeMesh& mesh, const CurvatureField& curvature) {
  return curvature.total() - 2.0 * kPi * mesh.euler_characteristic();
}

namespace {

double facing_angle(const HalfedgeMesh& mesh, const DiscreteMetric& metric, int h) {
  double a = metric[mesh.edge(h)];
  double b = metric[mesh.edge(HalfedgeMesh::next(h))];
  double c = metric[mesh.edge(HalfedgeMesh::prev(h))];
  if (!satisfies_triangle_inequality(a, b, c)) {
    throw Error(ErrorKind::Geometry, "metric",
                "triangle inequality violated on face " + std::to_string(HalfedgeMesh::face(h)));
  }
  return angle_opposite(a, b, c);
}

}  // namespace

bool is_delaunay(const HalfedgeMesh& mesh, const DiscreteMetric& metric, int edge) {
  const int h = mesh.edge_halfedge(edge);
  const int t = mesh.twin(h);
  if (t < 0) throw Error(ErrorKind::InvalidArgument, "delaunay", "boundary edge has no Delaunay test");
  return facing_angle(mesh, metric, h) + facing_angle(mesh, metric, t) <= kPi + 1e-12;
}

double flipped_diagonal_length(const HalfedgeMesh& mesh, const DiscreteMetric& metric, int edge) {
  const int h = mesh.edge_halfedge(edge);
  const int t = mesh.twin(h);
  if (t < 0) throw Error(ErrorKind::InvalidArgument, "flip", "cannot flip a boundary edge");
  const double lab = metric[edge];
  const double lbc = metric[mesh.edge(HalfedgeMesh::next(h))];
  const double lca = metric[mesh.edge(HalfedgeMesh::prev(h))];
  const double lad = metric[mesh.edge(HalfedgeMesh::next(t))];
  const double ldb = metric[mesh.edge(HalfedgeMesh::prev(t))];
  if (!satisfies_triangle_inequality(lab, lbc, lca) || !satisfies_triangle_inequality(lab, lad, ldb)) {
    throw Error(ErrorKind::Geometry, "flip", "triangle inequality violated next to edge " +
                                                 std::to_string(edge));
  }
  // a = (0,0), b = (lab,0); c above the axis, d below.
  const double cx = (lab * lab + lca * lca - lbc * lbc) / (2.0 * lab);
  const double cy = std::sqrt(std::max(lca * lca - cx * cx, 0.0));
  const double dx = (lab * lab + lad * lad - ldb * ldb) / (2.0 * lab);
  const double dy = -std::sqrt(std::max(lad * lad - dx * dx, 0.0));
  const double cross_x = cx + (dx - cx) * (cy / (cy - dy));
  if (!(cy > 0 && dy < 0 && cross_x > 0 && cross_x < lab)) {
    throw Error(ErrorKind::Geometry, "flip",
                "flattened quad around edge " + std::to_string(edge) + " is not convex");
  }
  return std::hypot(cx - dx, cy - dy);
}

void diagonal_switch(HalfedgeMesh& mesh, DiscreteMetric& metric, int edge) {
  double length = flipped_diagonal_length(mesh, metric, edge);
  mesh.flip(edge);
  metric[edge] = length;
}

int make_delaunay(HalfedgeMesh& mesh, DiscreteMetric& metric, const std::function<void(int)>& on_flip) {
  std::vector<int> stack;
  std::vector<char> queued(mesh.num_edges(), 0);
  for (int e = mesh.num_edges() - 1; e >= 0; --e) {
    if (!mesh.is_boundary_edge(e)) {
      stack.push_back(e);
      queued[e] = 1;
    }
  }
  const long cap = 50L * mesh.num_edges();
  int flips = 0;
  while (!stack.empty()) {
    int e = stack.back();
    stack.pop_back();
    queued[e] = 0;
    if (is_delaunay(mesh, metric, e)) continue;
    if (flips >= cap) {
      throw Error(ErrorKind::Geometry, "delaunay", "flip cap exceeded; metric is degenerate");
    }
    diagonal_switch(mesh, metric, e);
    ++flips;
    if (on_flip) on_flip(e);
    const int h = mesh.edge_halfedge(e);
    const int t = mesh.twin(h);
    for (int g : {HalfedgeMesh::next(h), HalfedgeMesh::prev(h), HalfedgeMesh::next(t),
                  HalfedgeMesh::prev(t)}) {
      int eg = mesh.edge(g);
      if (!mesh.is_boundary_edge(eg) && !queued[eg]) {
        stack.push_back(eg);
        queued[eg] = 1;
      }
    }
  }
  return flips;
}

std::vector<double> cotan_weights(const HalfedgeMesh& mesh, const CornerAngles& angles) {
  std::vector<double> w(mesh.num_edges(), 0.0);
  for (int h = 0; h < mesh.num_halfedges(); ++h) {
    w[mesh.edge(h)] += 1.0 / std::tan(angles[HalfedgeMesh::prev(h)]);
  }
  return w;
}

SparseMatrix cotan_laplacian(const HalfedgeMesh& mesh, const CornerAngles& angles) {
  const auto w = cotan_weights(mesh, angles);
  const int n = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(4 * mesh.num_edges()));
  std::vector<double> diag(n, 0.0);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto [i, j] = mesh.edge_vertices(e);
    triplets.emplace_back(i, j, -w[e]);
    triplets.emplace_back(j, i, -w[e]);
    diag[i] += w[e];
    diag[j] += w[e];
  }
  for (int v = 0; v < n; ++v) triplets.emplace_back(v, v, diag[v]);
  SparseMatrix L(n, n);
  L.setFromTriplets(triplets.begin(), triplets.end());
  return L;
}

std::vector<double> face_areas(const HalfedgeMesh& mesh, const DiscreteMetric& metric) {
  std::vector<double> areas(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    auto l = face_lengths(mesh, metric, f);
    areas[f] = heron(l[0], l[1], l[2]);
  }
  return areas;
}

std::vector<double> face_areas(const HalfedgeMesh& mesh) {
  if (!mesh.has_positions()) throw Error(ErrorKind::InvalidArgument, "mesh", "mesh has no positions");
  std::vector<double> areas(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.face_vertices(f);
    const Vec3& a = mesh.position(t[0]);
    areas[f] = 0.5 * (mesh.position(t[1]) - a).cross(mesh.position(t[2]) - a).norm();
    if (!(areas[f] > 0)) {
      throw Error(ErrorKind::Geometry, "mesh", "zero-area face " + std::to_string(f));
    }
  }
  return areas;
}

std::vector<double> vertex_area_weights(const HalfedgeMesh& mesh) {
  const auto areas = face_areas(mesh);
  std::vector<double> w(mesh.num_vertices(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int v : mesh.face_vertices(f)) w[v] += areas[f] / 3.0;
  }
  return w;
}

double total_area(const HalfedgeMesh& mesh) {
  const auto areas = face_areas(mesh);
  return std::accumulate(areas.begin(), areas.end(), 0.0);
}

}  // namespace sphereflow
