#include "sphereflow/segment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "sphereflow/error.hpp"

namespace sphereflow {

namespace {

double fract_hash(int v, double seed) {
  double x = std::sin(12.9898 * v + seed) * 43758.5453;
  return x - std::floor(x) - 0.5;
}

}  // namespace

EigenFunction first_eigenfunction(const HalfedgeMesh& mesh, const EigenOptions& opt) {
  if (!mesh.is_closed()) throw Error(ErrorKind::Topology, "segment", "mesh is not closed");
  if (mesh.num_components() != 1) throw Error(ErrorKind::Topology, "segment", "mesh is disconnected");
  const int n = mesh.num_vertices();
  const std::vector<double> w = vertex_area_weights(mesh);
  SparseMatrix L = 0.5 * cotan_laplacian(mesh, corner_angles(mesh, euclidean_metric(mesh)));
  Eigen::VectorXd M = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
  const double mass = M.sum();

  double trace = 0.0;
  for (int k = 0; k < n; ++k) trace += L.coeff(k, k);
  // Small positive shift: the constant is then the only badly amplified mode
  // and it is projected out every sweep.
  const double sigma = 1e-6 * trace / mass;
  SparseMatrix A = L;
  for (int k = 0; k < n; ++k) A.coeffRef(k, k) += sigma * M[k];
  Eigen::SimplicialLDLT<SparseMatrix> solver(A);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::Solver, "segment", "factorization of the shifted Laplacian failed");
  }

  const int p = std::min(4, n - 1);
  Eigen::MatrixXd Q(n, p);
  for (int v = 0; v < n; ++v) {
    const Vec3& x = mesh.position(v);
    for (int j = 0; j < p; ++j) Q(v, j) = j < 3 ? x[j] + 0.03 * fract_hash(v, j) : fract_hash(v, 7.0);
  }

  EigenFunction out;
  Eigen::VectorXd f;
  double lambda = 0.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Eigen::MatrixXd Y(n, p);
    for (int j = 0; j < p; ++j) Y.col(j) = solver.solve(M.cwiseProduct(Q.col(j)));
    for (int j = 0; j < p; ++j) Y.col(j).array() -= M.dot(Y.col(j)) / mass;
    // M-orthonormalize, then Rayleigh-Ritz on the span.
    Eigen::MatrixXd B = Y.transpose() * M.asDiagonal() * Y;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::Solver, "segment", "subspace collapsed");
    Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(p, p));
    Y = Y * Linv.transpose();
    Eigen::MatrixXd R = Y.transpose() * (L * Y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (R + R.transpose()));
    Q = Y * es.eigenvectors();
    lambda = es.eigenvalues()[0];
    f = Q.col(0);
    const double res = (L * f - lambda * M.cwiseProduct(f)).norm() / f.norm();
    out.iterations = it;
    out.residual = res;
    if (res < opt.tolerance) break;
    if (it == opt.max_iterations) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "eigen solver did not converge (residual %.3e)", res);
      throw Error(ErrorKind::Solver, "segment", buf);
    }
  }
  f.array() -= M.dot(f) / mass;
  f /= std::sqrt(M.dot(f.cwiseProduct(f)));
  int arg = 0;
  f.cwiseAbs().maxCoeff(&arg);
  if (f[arg] < 0) f = -f;
  out.values.assign(f.data(), f.data() + n);
  out.eigenvalue = lambda;
  if (!(lambda > 1e-10)) throw Error(ErrorKind::Solver, "segment", "returned eigenvalue is not positive");
  return out;
}

std::vector<CutLoop> zero_level_loops(const HalfedgeMesh& mesh, const std::vector<double>& f_in) {
  std::vector<double> f = f_in;
  for (double& x : f)
    if (x == 0.0) x = 1e-12;
  bool pos = false, neg = false;
  for (double x : f) (x > 0 ? pos : neg) = true;
  if (!pos || !neg) throw Error(ErrorKind::Geometry, "segment", "no zero level set");

  std::vector<char> crossed(mesh.num_edges(), 0);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto [a, b] = mesh.edge_vertices(e);
    crossed[e] = (f[a] > 0) != (f[b] > 0);
  }
  std::vector<char> used(mesh.num_edges(), 0);
  std::vector<CutLoop> loops;
  for (int e0 = 0; e0 < mesh.num_edges(); ++e0) {
    if (!crossed[e0] || used[e0]) continue;
    CutLoop loop;
    int h = mesh.edge_halfedge(e0);
    int e = e0;
    for (;;) {
      used[e] = 1;
      auto [a, b] = mesh.edge_vertices(e);
      double t = f[a] / (f[a] - f[b]);
      loop.points.push_back({e, t, mesh.position(a) + t * (mesh.position(b) - mesh.position(a))});
      // Leave face(h) through its other crossed edge.
      int next = -1;
      for (int g : {HalfedgeMesh::next(h), HalfedgeMesh::prev(h)})
        if (crossed[mesh.edge(g)]) next = g;
      if (next < 0) throw Error(ErrorKind::Geometry, "segment", "level set is inconsistent");
      int t_next = mesh.twin(next);
      if (t_next < 0) throw Error(ErrorKind::Geometry, "segment", "loop fails to close");
      e = mesh.edge(next);
      h = t_next;
      if (e == e0) break;
      if (used[e]) throw Error(ErrorKind::Geometry, "segment", "loop fails to close");
    }
    for (std::size_t k = 0; k < loop.points.size(); ++k)
      loop.length += (loop.points[(k + 1) % loop.points.size()].position - loop.points[k].position).norm();
    loops.push_back(std::move(loop));
  }
  std::stable_sort(loops.begin(), loops.end(),
                   [](const CutLoop& a, const CutLoop& b) { return a.length > b.length; });
  return loops;
}

CutLoop zero_level_loop(const HalfedgeMesh& mesh, const std::vector<double>& f) {
  return zero_level_loops(mesh, f).front();
}

namespace {

// Splits every face containing the directed or reversed edge (a, b) at m.
void split_edge(std::vector<Face>& faces, int a, int b, int m) {
  std::vector<Face> out;
  out.reserve(faces.size() + 2);
  for (const Face& f : faces) {
    int c = -1;
    for (int k = 0; k < 3; ++k) {
      int u = f[k], v = f[(k + 1) % 3];
      if ((u == a && v == b) || (u == b && v == a)) c = k;
    }
    if (c < 0) {
      out.push_back(f);
      continue;
    }
    int u = f[c], v = f[(c + 1) % 3], w = f[(c + 2) % 3];
    out.push_back({u, m, w});
    out.push_back({m, v, w});
  }
  faces = std::move(out);
}

Segment extract(const HalfedgeMesh& split, const std::vector<int>& comp, int side) {
  std::vector<int> local(split.num_vertices(), -1);
  std::vector<Face> faces;
  for (int f = 0; f < split.num_faces(); ++f)
    if (comp[f] == side)
      for (int v : split.face_vertices(f)) local[v] = 0;
  Segment seg;
  std::vector<Vec3> pos;
  for (int v = 0; v < split.num_vertices(); ++v)
    if (local[v] == 0) {
      local[v] = static_cast<int>(seg.to_split.size());
      seg.to_split.push_back(v);
      pos.push_back(split.position(v));
    }
  for (int f = 0; f < split.num_faces(); ++f)
    if (comp[f] == side) {
      const Face& fv = split.face_vertices(f);
      faces.push_back({local[fv[0]], local[fv[1]], local[fv[2]]});
    }
  const std::size_t nv = pos.size();
  seg.mesh = HalfedgeMesh::build(nv, std::move(faces), std::move(pos));
  if (seg.mesh.euler_characteristic() != 1 || seg.mesh.boundary_loops().size() != 1) {
    throw Error(ErrorKind::Topology, "segment", "a side of the cut is not a topological disk");
  }
  return seg;
}

}  // namespace

Segmentation split_mesh(const HalfedgeMesh& mesh, const std::vector<double>& f_in, const CutLoop& loop,
                        double edge_margin) {
  if (!(edge_margin >= 0.0 && edge_margin < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "segment", "edge margin must lie in [0, 0.5)");
  }
  const int n = mesh.num_vertices();
  if (loop.points.size() < 3) throw Error(ErrorKind::Geometry, "segment", "loop is too short");
  std::vector<double> f = f_in;
  for (double& x : f)
    if (x == 0.0) x = 1e-12;

  std::vector<Vec3> pos = mesh.positions();
  std::vector<int> edge_vertex(mesh.num_edges(), -1);
  for (const LoopPoint& p : loop.points) {
    if (edge_vertex[p.edge] >= 0) throw Error(ErrorKind::Geometry, "segment", "loop crosses an edge twice");
    edge_vertex[p.edge] = static_cast<int>(pos.size());
    // Keep the split point off the edge ends so no sliver faces appear.
    const auto [a, b] = mesh.edge_vertices(p.edge);
    const double t = std::clamp(p.t, edge_margin, 1.0 - edge_margin);
    pos.push_back((1.0 - t) * pos[a] + t * pos[b]);
  }
  std::vector<int> ring;  // loop vertices in loop order
  for (const LoopPoint& p : loop.points) ring.push_back(edge_vertex[p.edge]);

  std::vector<Face> faces;
  faces.reserve(mesh.num_faces() + 2 * loop.points.size());
  // An original vertex next to the loop and the loop vertex it touches.
  int anchor = -1, anchor_loop = -1;
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    int hits = 0, apex = -1;
    for (int c = 0; c < 3; ++c) {
      int h = 3 * fi + c;
      if (edge_vertex[mesh.edge(h)] >= 0 && edge_vertex[mesh.edge(HalfedgeMesh::prev(h))] >= 0) apex = c;
      hits += edge_vertex[mesh.edge(h)] >= 0;
    }
    if (hits == 0) {
      faces.push_back(mesh.face_vertices(fi));
      continue;
    }
    if (hits != 2 || apex < 0) throw Error(ErrorKind::Geometry, "segment", "loop crosses a face badly");
    const int hx = 3 * fi + apex;
    const int x = mesh.origin(hx), y = mesh.target(hx), z = mesh.opposite(hx);
    const int p = edge_vertex[mesh.edge(hx)], q = edge_vertex[mesh.edge(HalfedgeMesh::prev(hx))];
    if (anchor < 0) anchor = x, anchor_loop = p;
    faces.push_back({x, p, q});
    if ((pos[p] - pos[z]).norm() <= (pos[y] - pos[q]).norm()) {
      faces.push_back({p, y, z});
      faces.push_back({p, z, q});
    } else {
      faces.push_back({p, y, q});
      faces.push_back({y, z, q});
    }
  }

  // The welding needs at least four seam vertices.
  while (ring.size() < 4) {
    std::vector<int> refined;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      int a = ring[k], b = ring[(k + 1) % ring.size()];
      int m = static_cast<int>(pos.size());
      pos.push_back(0.5 * (pos[a] + pos[b]));
      split_edge(faces, a, b, m);
      refined.push_back(a);
      refined.push_back(m);
    }
    ring = std::move(refined);
  }

  Segmentation seg;
  seg.original_vertices = n;
  const std::size_t nv = pos.size();
  seg.split = HalfedgeMesh::build(nv, std::move(faces), std::move(pos));
  const HalfedgeMesh& s = seg.split;

  // Flood fill that never crosses a loop segment.
  std::vector<int> comp(s.num_faces(), -1);
  int ncomp = 0;
  for (int start = 0; start < s.num_faces(); ++start) {
    if (comp[start] >= 0) continue;
    std::deque<int> q{start};
    comp[start] = ncomp;
    while (!q.empty()) {
      int fi = q.front();
      q.pop_front();
      for (int c = 0; c < 3; ++c) {
        int h = 3 * fi + c;
        if (s.origin(h) >= n && s.target(h) >= n) continue;
        int t = s.twin(h);
        if (t >= 0 && comp[HalfedgeMesh::face(t)] < 0) {
          comp[HalfedgeMesh::face(t)] = ncomp;
          q.push_back(HalfedgeMesh::face(t));
        }
      }
    }
    ++ncomp;
  }
  if (ncomp != 2) throw Error(ErrorKind::Topology, "segment", "non-separating loop");
  int anchor_face = -1;
  for (int h : s.outgoing_halfedges(anchor))
    if (s.target(h) == anchor_loop) anchor_face = HalfedgeMesh::face(h);
  if ((comp[anchor_face] == 0) != (f[anchor] > 0))
    for (int& c : comp) c = 1 - c;
  seg.side = comp;
  seg.disks[0] = extract(s, comp, 0);
  seg.disks[1] = extract(s, comp, 1);

  const auto boundary0 = seg.disks[0].mesh.boundary_loops();
  for (int v : boundary0[0]) seg.seam.push_back(seg.disks[0].to_split[v]);
  if (seg.seam.size() != ring.size() ||
      seg.disks[1].mesh.boundary_loops()[0].size() != ring.size()) {
    throw Error(ErrorKind::Topology, "segment", "seam does not match the cut loop");
  }

  const double a0 = total_area(seg.disks[0].mesh), a1 = total_area(seg.disks[1].mesh);
  seg.area_ratio = a0 / a1;
  char buf[128];
  if (seg.area_ratio < 0.25 || seg.area_ratio > 4.0) {
    std::snprintf(buf, sizeof buf, "segment area ratio %.4g is outside [0.25, 4]", seg.area_ratio);
    throw Error(ErrorKind::Geometry, "segment", buf);
  }
  if (seg.area_ratio < 0.5 || seg.area_ratio > 2.0) {
    std::snprintf(buf, sizeof buf, "segment area ratio %.4g is outside [0.5, 2]", seg.area_ratio);
    seg.warnings.emplace_back(buf);
  }
  return seg;
}

Segmentation segment_mesh(const HalfedgeMesh& mesh, EigenFunction* eigen_out, CutLoop* loop_out) {
  EigenFunction ef = first_eigenfunction(mesh);
  CutLoop loop = zero_level_loop(mesh, ef.values);
  Segmentation seg = split_mesh(mesh, ef.values, loop);
  if (eigen_out) *eigen_out = std::move(ef);
  if (loop_out) *loop_out = std::move(loop);
  return seg;
}

void write_scalar_csv(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "segment", "cannot write " + path);
  out << "vertex,value\n";
  char buf[64];
  for (std::size_t v = 0; v < values.size(); ++v) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", v, values[v]);
    out << buf;
  }
}

}  // namespace sphereflow
