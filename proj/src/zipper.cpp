#include "sphereflow/zipper.hpp"

#include <cmath>
#include <string>

#include "sphereflow/error.hpp"
#include "sphereflow/parallel.hpp"

namespace sphereflow {

namespace {

using C = std::complex<double>;

constexpr const char* kStage = "weld";

// Rounding slack when deciding which side of the real axis a point is on.
double axis_slack(C z) { return 1e-12 * (1.0 + std::abs(z)); }

// Root of w^2 = s with Im w >= 0; `positive` picks the sign when s >= 0.
C upper_root(C s, bool positive) {
  C w = std::sqrt(s);
  if (w.imag() < 0.0) w = -w;
  if (w.imag() == 0.0) {
    w = C(std::abs(w.real()) * (positive ? 1.0 : -1.0), 0.0);
  }
  return w;
}

[[noreturn]] void crossed(const std::string& where) {
  throw Error(ErrorKind::Geometry, kStage, "branch tracking failure: a point crossed the slit (" + where + ")");
}

void apply_all(WeldState& state, const std::function<ExtendedComplex(const ExtendedComplex&)>& f) {
  for (auto* side : {&state.first, &state.second}) {
    auto& pts = *side;
    parallel_for(pts.size(), [&](std::size_t i) { pts[i] = f(pts[i]); });
  }
}

void check_disk(const PlanarEmbedding& d, const std::vector<int>& seam, const char* name) {
  const int n = static_cast<int>(d.positions.size());
  std::vector<char> seen(n, 0);
  for (int v : seam) {
    if (v < 0 || v >= n) throw Error(ErrorKind::InvalidArgument, kStage, std::string("signature vertex out of range in ") + name);
    if (seen[v]) throw Error(ErrorKind::InvalidArgument, kStage, std::string("signature repeats a vertex of ") + name);
    seen[v] = 1;
    if (std::abs(std::abs(d.positions[v]) - 1.0) > 1e-6) {
      throw Error(ErrorKind::InvalidArgument, kStage, std::string("seam vertex off the unit circle in ") + name);
    }
  }
  for (const C& z : d.positions) {
    if (!(std::abs(z) <= 1.0 + 1e-6)) {
      throw Error(ErrorKind::InvalidArgument, kStage, std::string(name) + " is not a unit-disk embedding");
    }
  }
}

double polygon_area(const PlanarEmbedding& d, const std::vector<int>& loop) {
  double a = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    C p = d.positions[loop[i]], q = d.positions[loop[(i + 1) % loop.size()]];
    a += p.real() * q.imag() - p.imag() * q.real();
  }
  return 0.5 * a;
}

}  // namespace

WeldingSignature welding_signature(const Segmentation& seg) {
  WeldingSignature sig;
  for (int s = 0; s < 2; ++s) {
    const auto& to_split = seg.disks[s].to_split;
    std::vector<int> local(seg.split.num_vertices(), -1);
    for (std::size_t i = 0; i < to_split.size(); ++i) local[to_split[i]] = static_cast<int>(i);
    auto& out = s == 0 ? sig.first : sig.second;
    for (int v : seg.seam) {
      if (local[v] < 0) throw Error(ErrorKind::Topology, kStage, "seam vertex missing from a disk");
      out.push_back(local[v]);
    }
  }
  return sig;
}

ExtendedComplex half_plane_sqrt(const ExtendedComplex& z, HalfPlane side) {
  if (z.is_infinite()) return z;
  C x = z.value();
  if (side == HalfPlane::Upper ? x.imag() < -axis_slack(x) : x.imag() > axis_slack(x)) {
    crossed("square root");
  }
  if (std::abs(x.imag()) <= axis_slack(x) && x.real() >= 0.0) {
    const double r = std::sqrt(x.real());
    return C(side == HalfPlane::Upper ? r : -r, 0.0);
  }
  return upper_root(x, true);
}

ExtendedComplex zipper_fold(const ExtendedComplex& z) {
  if (z.is_infinite()) return z;
  C x = z.value();
  if (x.imag() < -1e-9 * (1.0 + std::abs(x))) crossed("fold");
  if (x.imag() <= 0.0) {
    const double t = x.real();
    if (std::abs(t) <= 1.0) return C(0.0, std::sqrt((1.0 - t) * (1.0 + t)));
    return C(std::copysign(std::sqrt((t - 1.0) * (t + 1.0)), t), 0.0);
  }
  return upper_root(x * x - 1.0, x.real() >= 0.0);
}

ExtendedComplex zipper_zeta(const ExtendedComplex& z) {
  if (z.is_infinite()) return z;
  C x = z.value();
  return upper_root(x * x + 1.0, x.real() >= 0.0);
}

WeldedEmbedding zipper_weld(const PlanarEmbedding& d1, const PlanarEmbedding& d2,
                            const WeldingSignature& sig, const ZipperOptions& options) {
  const int n = static_cast<int>(sig.first.size());
  if (static_cast<int>(sig.second.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, kStage, "signature sides differ in length");
  }
  if (n < 4) throw Error(ErrorKind::InvalidArgument, kStage, "seam needs at least 4 vertices");
  check_disk(d1, sig.first, "D1");
  check_disk(d2, sig.second, "D2");
  if (!(polygon_area(d1, sig.first) > 0.0) || !(polygon_area(d2, sig.second) < 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kStage, "seam orders must run counter-clockwise on D1 and clockwise on D2");
  }

  WeldState st;
  st.first.assign(d1.positions.begin(), d1.positions.end());
  st.second.assign(d2.positions.begin(), d2.positions.end());
  std::vector<char> on_seam1(st.first.size(), 0), on_seam2(st.second.size(), 0);
  for (int k = 0; k < n; ++k) on_seam1[sig.first[k]] = on_seam2[sig.second[k]] = 1;

  auto seam1 = [&](int k) -> ExtendedComplex& { return st.first[sig.first[k]]; };
  auto seam2 = [&](int k) -> ExtendedComplex& { return st.second[sig.second[k]]; };
  auto snap_seam = [&](int from) {
    for (int k = from; k < n; ++k) {
      for (ExtendedComplex* p : {&seam1(k), &seam2(k)}) {
        if (!p->is_infinite()) *p = C(p->real(), 0.0);
      }
    }
  };
  const auto inf = ExtendedComplex::infinity();

  // Step 1: v0, v1, v2 -> inf, -1, 0 on both sides; the disks land in the
  // upper and lower half planes, glued along (-inf, 0] by the square root.
  {
    auto t1 = mobius_three_point(seam1(0), seam1(1), seam1(2), inf, -1.0, 0.0);
    auto t2 = mobius_three_point(seam2(0), seam2(1), seam2(2), inf, -1.0, 0.0);
    parallel_for(st.first.size(), [&](std::size_t i) { st.first[i] = t1(st.first[i]); });
    parallel_for(st.second.size(), [&](std::size_t i) { st.second[i] = t2(st.second[i]); });
    snap_seam(0);
    seam1(0) = seam2(0) = inf;
    seam1(1) = seam2(1) = C(-1.0, 0.0);
    seam1(2) = seam2(2) = C(0.0, 0.0);
    for (std::size_t i = 0; i < st.first.size(); ++i) {
      if (!on_seam1[i] && !(st.first[i].imag() > 0.0)) crossed("D1 interior");
      st.first[i] = half_plane_sqrt(st.first[i], HalfPlane::Upper);
    }
    for (std::size_t i = 0; i < st.second.size(); ++i) {
      if (!on_seam2[i] && !(st.second[i].imag() < 0.0)) crossed("D2 interior");
      st.second[i] = half_plane_sqrt(st.second[i], HalfPlane::Lower);
    }
    if (options.observer) options.observer(2, st);
  }

  // Step 2: glue seam vertex k at 0 by folding [-1, 0] onto [0, 1].
  for (int k = 3; k < n; ++k) {
    const double a = seam1(k).real(), b = seam2(k).real();
    if (!(a > 0.0) || !(b < 0.0)) {
      throw Error(ErrorKind::Geometry, kStage, "seam vertex " + std::to_string(k) + " left the real axis out of order");
    }
    auto t = mobius_three_point(b, 0.0, a, -1.0, 0.0, 1.0);
    apply_all(st, [&](const ExtendedComplex& z) { return t(z); });
    snap_seam(k);
    apply_all(st, zipper_fold);
    snap_seam(k + 1);
    seam1(k) = seam2(k) = C(0.0, 0.0);
    if (options.observer) options.observer(k, st);
  }

  // Step 3: v0 -> inf with 0 fixed, then z^2 closes the last gap.
  const ExtendedComplex x0 = seam1(0);
  if (!x0.is_infinite()) {
    const double r = x0.real();
    MobiusTransform s(C(-r), C(0.0), C(1.0), C(-r));
    apply_all(st, [&](const ExtendedComplex& z) { return s(z); });
  }
  apply_all(st, [](const ExtendedComplex& z) { return z * z; });
  seam1(0) = seam2(0) = inf;

  WeldedEmbedding out;
  for (int k = 0; k < n; ++k) {
    out.seam_mismatch = std::max(out.seam_mismatch, chordal_distance(seam1(k), seam2(k)));
  }
  if (out.seam_mismatch > options.seam_tolerance) {
    throw Error(ErrorKind::Geometry, kStage, "welded seam copies disagree by " + std::to_string(out.seam_mismatch));
  }
  int infinite = 0;
  for (std::size_t i = 0; i < st.first.size(); ++i) infinite += st.first[i].is_infinite() && !on_seam1[i];
  for (std::size_t i = 0; i < st.second.size(); ++i) infinite += st.second[i].is_infinite() && !on_seam2[i];
  for (int k = 1; k < n; ++k) infinite += seam1(k).is_infinite();
  if (infinite != 0) throw Error(ErrorKind::Geometry, kStage, "more than one vertex welded to infinity");
  out.positions = std::move(st);
  return out;
}

}  // namespace sphereflow
