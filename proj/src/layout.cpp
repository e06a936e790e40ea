#include "sphereflow/layout.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <unordered_map>

#include "sphereflow/error.hpp"

namespace sphereflow {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

// Third corner of a triangle on the left of p -> q, with |p r| = a, |q r| = b.
Complex apex(Complex p, Complex q, double c, double a, double b) {
  Complex d = (q - p) / std::abs(q - p);
  double x = (a * a - b * b + c * c) / (2.0 * c);
  double y = std::sqrt(std::max(a * a - x * x, 0.0));
  return p + d * Complex(x, y);
}

void require_annulus(const HalfedgeMesh& mesh) {
  if (mesh.num_components() != 1) {
    throw Error(ErrorKind::Topology, "annulus", "mesh is not connected");
  }
  const int chi = mesh.euler_characteristic();
  const auto loops = mesh.boundary_loops();
  if (chi != 0 || loops.size() != 2) {
    throw Error(ErrorKind::Topology, "annulus",
                "expected a topological annulus (Euler characteristic 0, two boundaries); got "
                "Euler characteristic " + std::to_string(chi) + " with " +
                    std::to_string(loops.size()) + " boundary loops");
  }
}

double loop_length(const HalfedgeMesh& mesh, const DiscreteMetric& metric, const std::vector<int>& loop) {
  double s = 0.0;
  for (int v : loop) s += metric[mesh.edge(mesh.vertex_halfedge(v))];
  return s;
}

int halfedge_between(const HalfedgeMesh& mesh, int a, int b) {
  for (int h : mesh.outgoing_halfedges(a))
    if (mesh.target(h) == b) return h;
  return -1;
}

// Multi-source Dijkstra from `from` to the first vertex of `to`; ties by index.
std::vector<int> shortest_path(const HalfedgeMesh& mesh, const DiscreteMetric& metric,
                               const std::vector<int>& from, const std::vector<int>& to) {
  const int n = mesh.num_vertices();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> pred(n, -1);
  std::vector<char> is_target(n, 0), done(n, 0);
  for (int v : to) is_target[v] = 1;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (int v : from) {
    dist[v] = 0.0;
    pq.emplace(0.0, v);
  }
  int reached = -1;
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (done[v]) continue;
    done[v] = 1;
    if (is_target[v]) {
      reached = v;
      break;
    }
    for (int h : mesh.outgoing_halfedges(v)) {
      int w = mesh.target(h);
      double nd = d + metric[mesh.edge(h)];
      if (nd < dist[w] || (nd == dist[w] && pred[w] >= 0 && v < pred[w])) {
        dist[w] = nd;
        pred[w] = v;
        pq.emplace(nd, w);
      }
    }
  }
  if (reached < 0) throw Error(ErrorKind::Topology, "annulus", "boundaries are not connected");
  std::vector<int> path;
  for (int v = reached; v >= 0; v = pred[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

double signed_area(Complex a, Complex b, Complex c) {
  Complex u = b - a, v = c - a;
  return 0.5 * (u.real() * v.imag() - u.imag() * v.real());
}

int count_flipped(const std::vector<Face>& faces, const PlanarEmbedding& emb) {
  int n = 0;
  for (const Face& f : faces)
    if (signed_area(emb.positions[f[0]], emb.positions[f[1]], emb.positions[f[2]]) <= 0.0) ++n;
  return n;
}

CornerLayout layout_corners(const HalfedgeMesh& mesh, const DiscreteMetric& metric,
                            const std::vector<char>& cut, int seed_face) {
  CornerLayout out;
  out.corners.assign(mesh.num_halfedges(), Complex(0, 0));
  if (mesh.num_faces() == 0) return out;
  std::vector<char> placed(mesh.num_faces(), 0);
  const int h0 = 3 * seed_face;
  const double c = metric[mesh.edge(h0)];
  out.corners[h0] = 0.0;
  out.corners[h0 + 1] = c;
  out.corners[h0 + 2] = apex(0.0, c, c, metric[mesh.edge(h0 + 2)], metric[mesh.edge(h0 + 1)]);
  placed[seed_face] = 1;
  std::deque<int> queue{seed_face};
  int count = 1;
  while (!queue.empty()) {
    const int f = queue.front();
    queue.pop_front();
    for (int k = 0; k < 3; ++k) {
      const int h = 3 * f + k;
      const int t = mesh.twin(h);
      if (t < 0 || (!cut.empty() && cut[mesh.edge(h)])) continue;
      const int g = HalfedgeMesh::face(t);
      if (placed[g]) continue;
      // t runs target(h) -> origin(h); its face lies on its left.
      Complex p = out.corners[HalfedgeMesh::next(h)];
      Complex q = out.corners[h];
      out.corners[t] = p;
      out.corners[HalfedgeMesh::next(t)] = q;
      out.corners[HalfedgeMesh::prev(t)] =
          apex(p, q, metric[mesh.edge(t)], metric[mesh.edge(HalfedgeMesh::prev(t))],
               metric[mesh.edge(HalfedgeMesh::next(t))]);
      placed[g] = 1;
      ++count;
      queue.push_back(g);
    }
  }
  if (count != mesh.num_faces()) {
    throw Error(ErrorKind::Topology, "layout", "cut disconnects the mesh");
  }
  return out;
}

PlanarEmbedding layout_flat_metric(const HalfedgeMesh& mesh, const DiscreteMetric& metric) {
  CornerLayout cl = layout_corners(mesh, metric);
  PlanarEmbedding emb;
  emb.positions.assign(mesh.num_vertices(), Complex(0, 0));
  std::vector<char> seen(mesh.num_vertices(), 0);
  double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
  for (const Complex& z : cl.corners) {
    lo_x = std::min(lo_x, z.real()), hi_x = std::max(hi_x, z.real());
    lo_y = std::min(lo_y, z.imag()), hi_y = std::max(hi_y, z.imag());
  }
  const double diam = std::hypot(hi_x - lo_x, hi_y - lo_y);
  for (int h = 0; h < mesh.num_halfedges(); ++h) {
    const int v = mesh.origin(h);
    if (!seen[v]) {
      emb.positions[v] = cl.corners[h];
      seen[v] = 1;
    } else if (std::abs(emb.positions[v] - cl.corners[h]) > 1e-6 * diam) {
      throw Error(ErrorKind::Geometry, "layout",
                  "metric is not flat: vertex " + std::to_string(v) + " develops inconsistently");
    }
  }
  return emb;
}

AnnulusMap map_annulus(const HalfedgeMesh& mesh, const DiscreteMetric& metric, const AnnulusOptions& opt) {
  require_annulus(mesh);
  auto loops = mesh.boundary_loops();
  int outer = 0;
  if (opt.outer_vertex >= 0) {
    outer = std::find(loops[1].begin(), loops[1].end(), opt.outer_vertex) != loops[1].end() ? 1 : 0;
    if (outer == 0 && std::find(loops[0].begin(), loops[0].end(), opt.outer_vertex) == loops[0].end()) {
      throw Error(ErrorKind::InvalidArgument, "annulus", "outer vertex is not on the boundary");
    }
  } else {
    outer = loop_length(mesh, metric, loops[1]) > loop_length(mesh, metric, loops[0]) ? 1 : 0;
  }
  const std::vector<int>& outer_loop = loops[outer];
  const std::vector<int>& inner_loop = loops[1 - outer];

  std::vector<double> zero(mesh.num_vertices(), 0.0);
  YamabeResult flow;
  try {
    flow = yamabe_flow(mesh, metric, zero, opt.flow);
  } catch (const Error& e) {
    rethrow_in_stage(e, "annulus");
  }
  const HalfedgeMesh& m = flow.mesh;

  AnnulusMap res;
  res.flow_iterations = flow.iterations;
  res.flips = flow.total_flips;
  res.flow_trace = std::move(flow.trace);
  res.cut_path = shortest_path(m, flow.metric, inner_loop, outer_loop);

  std::vector<char> cut(m.num_edges(), 0);
  std::vector<int> along;  // halfedges along the path
  for (std::size_t k = 0; k + 1 < res.cut_path.size(); ++k) {
    int h = halfedge_between(m, res.cut_path[k], res.cut_path[k + 1]);
    if (h < 0 || m.is_boundary_halfedge(h)) {
      throw Error(ErrorKind::Geometry, "annulus", "cut path runs along the boundary");
    }
    cut[m.edge(h)] = 1;
    along.push_back(h);
  }
  CornerLayout cl = layout_corners(m, flow.metric, cut);

  // Deck translation between the two sides of the cut.
  Complex T(0, 0);
  for (int h : along) {
    const int t = m.twin(h);
    T += cl.corners[HalfedgeMesh::next(t)] - cl.corners[h];
    T += cl.corners[t] - cl.corners[HalfedgeMesh::next(h)];
  }
  T /= 2.0 * along.size();
  if (std::abs(T) == 0.0) throw Error(ErrorKind::Geometry, "annulus", "degenerate period");
  Complex s = Complex(0, 2.0 * kPi) / T;

  std::vector<char> on_outer(m.num_vertices(), 0), on_inner(m.num_vertices(), 0);
  for (int v : outer_loop) on_outer[v] = 1;
  for (int v : inner_loop) on_inner[v] = 1;
  double re_outer = 0, re_inner = 0;
  int n_outer = 0, n_inner = 0;
  for (int h = 0; h < m.num_halfedges(); ++h) {
    double re = (s * cl.corners[h]).real();
    if (on_outer[m.origin(h)]) re_outer += re, ++n_outer;
    if (on_inner[m.origin(h)]) re_inner += re, ++n_inner;
  }
  re_outer /= n_outer;
  re_inner /= n_inner;
  if (re_outer < re_inner) {
    s = -s;
    re_outer = -re_outer;
  }

  std::vector<Complex> sum(m.num_vertices(), Complex(0, 0));
  std::vector<int> cnt(m.num_vertices(), 0);
  std::vector<Complex> first(m.num_vertices(), Complex(0, 0));
  double spread = 0.0;
  for (int h = 0; h < m.num_halfedges(); ++h) {
    const int v = m.origin(h);
    Complex w = std::exp(s * cl.corners[h] - re_outer);
    if (cnt[v] == 0) first[v] = w;
    spread = std::max(spread, std::abs(w - first[v]));
    sum[v] += w;
    ++cnt[v];
  }
  if (spread > 1e-4) {
    throw Error(ErrorKind::Geometry, "annulus", "corner copies disagree after the exponential map");
  }
  res.embedding.positions.resize(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) res.embedding.positions[v] = sum[v] / double(cnt[v]);

  double r_out = 0, r_in = 0;
  for (int v : outer_loop) r_out += std::abs(res.embedding.positions[v]);
  for (int v : inner_loop) r_in += std::abs(res.embedding.positions[v]);
  r_out /= outer_loop.size();
  r_in /= inner_loop.size();
  for (Complex& z : res.embedding.positions) z /= r_out;
  res.outer_radius = 1.0;
  res.inner_radius = r_in / r_out;
  res.flipped_mesh = m;
  return res;
}

RiemannMap riemann_map(const HalfedgeMesh& mesh, const DiscreteMetric& metric, const YamabeOptions& flow) {
  if (mesh.num_components() != 1) throw Error(ErrorKind::Topology, "riemann", "mesh is not connected");
  const int chi = mesh.euler_characteristic();
  const auto loops = mesh.boundary_loops();
  if (chi != 1 || loops.size() != 1) {
    throw Error(ErrorKind::Topology, "riemann",
                "expected a topological disk (Euler characteristic 1, one boundary); got Euler "
                "characteristic " + std::to_string(chi) + " with " + std::to_string(loops.size()) +
                    " boundary loops");
  }
  // Graph distance to the boundary.
  const int n = mesh.num_vertices();
  std::vector<int> dist(n, -1);
  std::deque<int> q;
  for (int v : loops[0]) dist[v] = 0, q.push_back(v);
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int w : mesh.vertex_neighbors(v))
      if (dist[w] < 0) dist[w] = dist[v] + 1, q.push_back(w);
  }
  int best = -1, best_score = 0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fv = mesh.face_vertices(f);
    int score = std::min({dist[fv[0]], dist[fv[1]], dist[fv[2]]});
    if (score > best_score) best = f, best_score = score;
  }
  if (best < 0) {
    throw Error(ErrorKind::Topology, "riemann", "no interior face to puncture");
  }

  std::vector<Face> faces;
  faces.reserve(mesh.num_faces() - 1);
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (f != best) faces.push_back(mesh.face_vertices(f));
  HalfedgeMesh annulus = HalfedgeMesh::build(n, std::move(faces), mesh.positions());
  std::unordered_map<std::uint64_t, int> edge_of;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto [a, b] = mesh.edge_vertices(e);
    edge_of.emplace(pair_key(a, b), e);
  }
  DiscreteMetric am;
  am.lengths.resize(annulus.num_edges());
  for (int e = 0; e < annulus.num_edges(); ++e) {
    auto [a, b] = annulus.edge_vertices(e);
    am.lengths[e] = metric[edge_of.at(pair_key(a, b))];
  }

  AnnulusOptions opt;
  opt.flow = flow;
  opt.outer_vertex = loops[0][0];
  AnnulusMap am_res;
  try {
    am_res = map_annulus(annulus, am, opt);
  } catch (const Error& e) {
    rethrow_in_stage(e, "riemann");
  }
  RiemannMap res;
  res.embedding = std::move(am_res.embedding);
  res.punctured_face = best;
  res.hole_radius = am_res.inner_radius;
  res.flow_iterations = am_res.flow_iterations;
  res.flips = am_res.flips;
  res.flow_trace = std::move(am_res.flow_trace);
  return res;
}

RiemannMap riemann_map(const HalfedgeMesh& mesh, const YamabeOptions& flow) {
  return riemann_map(mesh, euclidean_metric(mesh), flow);
}

}  // namespace sphereflow
