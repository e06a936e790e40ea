#include "sphereflow/flow.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include <Eigen/SparseCholesky>

#include "sphereflow/error.hpp"

namespace sphereflow {

namespace {

constexpr double kPi = std::numbers::pi;

// zeta(2k) for the Clausen series.
const std::array<double, 40>& zeta_even() {
  static const std::array<double, 40> table = [] {
    std::array<double, 40> z{};
    z[0] = kPi * kPi / 6.0;
    z[1] = std::pow(kPi, 4) / 90.0;
    for (int k = 3; k <= 40; ++k) {
      double s = 0.0;
      for (int n = 200; n >= 1; --n) s += std::pow(double(n), -2.0 * k);
      z[k - 1] = s;
    }
    return z;
  }();
  return table;
}

// Clausen function Cl2 on (-pi, pi]; x = 0 handled by the limit.
double clausen(double x) {
  x = std::remainder(x, 2.0 * kPi);
  if (x == 0.0) return 0.0;
  const double r = x / (2.0 * kPi);
  const double r2 = r * r;
  const auto& z = zeta_even();
  double sum = 0.0, p = r2;
  for (int k = 1; k <= 40; ++k) {
    double term = z[k - 1] / (k * (2.0 * k + 1.0)) * p;
    sum += term;
    if (term < 1e-18 * std::abs(sum)) break;
    p *= r2;
  }
  return x - x * std::log(std::abs(x)) + x * sum;
}

struct Evaluation {
  bool valid = false;
  CornerAngles angles;
  CurvatureField curvature;
  std::vector<double> gradient;  // K - Kbar
  double residual = 0;
};

bool lengths_valid(const HalfedgeMesh& mesh, const DiscreteMetric& l) {
  for (int f = 0; f < mesh.num_faces(); ++f) {
    double a = l[mesh.edge(3 * f)], b = l[mesh.edge(3 * f + 1)], c = l[mesh.edge(3 * f + 2)];
    if (!std::isfinite(a + b + c) || !satisfies_triangle_inequality(a, b, c)) return false;
  }
  return true;
}

Evaluation evaluate(const HalfedgeMesh& mesh, const ConformalState& s) {
  Evaluation ev;
  DiscreteMetric l = conformal_lengths(mesh, s);
  if (!lengths_valid(mesh, l)) return ev;
  ev.valid = true;
  ev.angles = corner_angles(mesh, l);
  ev.curvature = vertex_curvature(mesh, ev.angles);
  ev.gradient.resize(s.u.size());
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    ev.gradient[i] = ev.curvature[static_cast<int>(i)] - s.target[i];
    ev.residual = std::max(ev.residual, std::abs(ev.gradient[i]));
  }
  return ev;
}

void check_target(const HalfedgeMesh& mesh, const std::vector<double>& target) {
  if (static_cast<int>(target.size()) != mesh.num_vertices()) {
    throw Error(ErrorKind::InvalidArgument, "yamabe", "target curvature has wrong size");
  }
  double total = 0.0;
  for (double k : target) {
    if (!(k < 2.0 * kPi)) {
      throw Error(ErrorKind::InvalidArgument, "yamabe", "target curvature must be below 2*pi");
    }
    total += k;
  }
  const double expected = 2.0 * kPi * mesh.euler_characteristic();
  const double tol = 1e-9 + 1e-13 * mesh.num_vertices();
  if (std::abs(total - expected) > tol) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "target curvature total %.12g violates Gauss-Bonnet (2*pi*chi = %.12g)",
                  total, expected);
    throw Error(ErrorKind::InvalidArgument, "yamabe", buf);
  }
}

}  // namespace

double lobachevsky(double x) { return 0.5 * clausen(2.0 * x); }

DiscreteMetric conformal_lengths(const HalfedgeMesh& mesh, const ConformalState& state) {
  DiscreteMetric l;
  l.lengths.resize(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto [i, j] = mesh.edge_vertices(e);
    l.lengths[e] = std::exp(state.u[i]) * state.beta[e] * std::exp(state.u[j]);
  }
  return l;
}

std::vector<double> ricci_energy_gradient(const ConformalState& state, const CurvatureField& K) {
  std::vector<double> g(state.target.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = state.target[i] - K[static_cast<int>(i)];
  return g;
}

double ricci_energy(const HalfedgeMesh& mesh, const ConformalState& state) {
  DiscreteMetric l = conformal_lengths(mesh, state);
  CornerAngles th = corner_angles(mesh, l);
  // Per face: 1/2 sum theta * lambda + sum L(theta), lambda = 2 log(opposite length).
  // Its u-derivative at vertex i is pi - theta_i.
  double e = 0.0;
  std::vector<int> face_count(mesh.num_vertices(), 0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      const int h = 3 * f + c;
      const double theta = th[h];
      const double opposite = l[mesh.edge(HalfedgeMesh::next(h))];
      e += theta * std::log(opposite) + lobachevsky(theta);
      ++face_count[mesh.origin(h)];
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double a = mesh.is_boundary_vertex(v) ? kPi : 2.0 * kPi;
    e += (a - kPi * face_count[v] - state.target[v]) * state.u[v];
  }
  return e;
}

YamabeResult yamabe_flow(const HalfedgeMesh& input, const DiscreteMetric& metric,
                         const std::vector<double>& target, const YamabeOptions& opt) {
  check_target(input, target);
  const int n = input.num_vertices();
  if (opt.pinned_vertex < 0 || opt.pinned_vertex >= n) {
    throw Error(ErrorKind::InvalidArgument, "yamabe", "pinned vertex out of range");
  }

  YamabeResult res;
  res.mesh = input;
  ConformalState& s = res.state;
  s.u.assign(n, 0.0);
  s.target = target;
  s.beta = metric.lengths;
  corner_angles(res.mesh, metric);  // validates the input metric

  auto restore_delaunay = [&](ConformalState& st) {
    DiscreteMetric l = conformal_lengths(res.mesh, st);
    return make_delaunay(res.mesh, l, [&](int e) {
      auto [i, j] = res.mesh.edge_vertices(e);
      st.beta[e] = l[e] * std::exp(-st.u[i] - st.u[j]);
    });
  };

  res.total_flips = restore_delaunay(s);
  Evaluation ev = evaluate(res.mesh, s);
  double energy = ricci_energy(res.mesh, s);
  res.trace.push_back({0, ev.residual, energy, 0.0, res.total_flips});

  // The pinned vertex is removed from the system to fix the constant mode.
  std::vector<int> reduced(n, -1);
  for (int v = 0, k = 0; v < n; ++v)
    if (v != opt.pinned_vertex) reduced[v] = k++;

  // Three-point Gauss-Legendre nodes for the energy change along a step.
  const double gq[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  int iter = 0;
  while (ev.residual >= opt.epsilon) {
    if (iter >= opt.max_iterations) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "no convergence after %d iterations (residual %.3e)", iter,
                    ev.residual);
      throw Error(ErrorKind::Solver, "yamabe", buf);
    }
    ++iter;

    SparseMatrix L = cotan_laplacian(res.mesh, ev.angles);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(L.nonZeros());
    for (int k = 0; k < L.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(L, k); it; ++it) {
        int r = reduced[it.row()], c = reduced[it.col()];
        if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
      }
    SparseMatrix A(n - 1, n - 1);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd b(n - 1);
    for (int v = 0; v < n; ++v)
      if (reduced[v] >= 0) b[reduced[v]] = ev.gradient[v];
    Eigen::SimplicialLDLT<SparseMatrix> solver(A);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::Solver, "yamabe", "Hessian factorization failed");
    }
    Eigen::VectorXd xr = solver.solve(b);
    if (solver.info() != Eigen::Success || !xr.allFinite()) {
      throw Error(ErrorKind::Solver, "yamabe", "Hessian solve failed");
    }
    std::vector<double> x(n, 0.0);
    for (int v = 0; v < n; ++v)
      if (reduced[v] >= 0) x[v] = xr[reduced[v]];

    // Backtracking: halve until lengths stay valid and the energy does not rise.
    double delta = opt.initial_step;
    bool accepted = false;
    ConformalState trial = s;
    double de = 0.0;
    for (int halving = 0; halving < 60 && !accepted; ++halving, delta *= 0.5) {
      de = 0.0;
      bool ok = true;
      for (int q = 0; q < 3 && ok; ++q) {
        for (int v = 0; v < n; ++v) trial.u[v] = s.u[v] - gq[q] * delta * x[v];
        Evaluation eq = evaluate(res.mesh, trial);
        if (!eq.valid) {
          ok = false;
          break;
        }
        double dot = 0.0;
        for (int v = 0; v < n; ++v) dot += eq.gradient[v] * x[v];
        de -= gw[q] * delta * dot;
      }
      if (!ok) continue;
      for (int v = 0; v < n; ++v) trial.u[v] = s.u[v] - delta * x[v];
      if (!evaluate(res.mesh, trial).valid) continue;
      if (de <= 0.0) accepted = true;
      if (accepted) break;
    }
    if (!accepted) {
      throw Error(ErrorKind::Solver, "yamabe", "line search failed to find a descent step");
    }
    s.u = trial.u;
    energy += de;
    int flips = restore_delaunay(s);
    res.total_flips += flips;
    ev = evaluate(res.mesh, s);
    if (!ev.valid) throw Error(ErrorKind::Solver, "yamabe", "metric degenerated after flips");
    res.trace.push_back({iter, ev.residual, energy, delta, flips});
  }

  // Gauge: sum u = 0. Lengths scale uniformly; angles are unaffected.
  const double mean = std::accumulate(s.u.begin(), s.u.end(), 0.0) / n;
  for (double& u : s.u) u -= mean;
  res.metric = conformal_lengths(res.mesh, s);
  res.iterations = iter;
  res.residual = ev.residual;
  return res;
}

void write_yamabe_trace(const std::string& path, const std::vector<YamabeIterate>& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "yamabe", "cannot write trace " + path);
  out << "iteration,max_residual,energy,step,flips\n";
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d\n", r.iteration, r.residual, r.energy,
                  r.step, r.flips);
    out << buf;
  }
}

}  // namespace sphereflow
