#include "sphereflow/conformal_map.hpp"

#include <cmath>
#include <map>

#include "sphereflow/error.hpp"

namespace sphereflow {

std::pair<int, int> default_landmarks(const HalfedgeMesh& mesh) {
  const auto& p = mesh.positions();
  int top = 0, front = 0;
  for (int v = 1; v < mesh.num_vertices(); ++v) {
    if (p[v].z() > p[top].z()) top = v;
  }
  front = top == 0 ? 1 : 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (v != top && p[v].x() > p[front].x()) front = v;
  }
  return {top, front};
}

HalfedgeMesh rescale_to_sphere_area(const HalfedgeMesh& mesh, double* scale) {
  const double s = std::sqrt(4.0 * M_PI / total_area(mesh));
  HalfedgeMesh out = mesh;
  std::vector<Vec3> pos = mesh.positions();
  for (Vec3& q : pos) q *= s;
  out.set_positions(std::move(pos));
  if (scale) *scale = s;
  return out;
}

namespace {

// Stereographic projection reverses orientation against the outward
// normal, so lift the conjugate plane to keep faces counter-clockwise.
SphericalEmbedding lift_plane(const std::vector<ExtendedComplex>& plane) {
  SphericalEmbedding lifted;
  lifted.positions.resize(plane.size());
  for (std::size_t v = 0; v < plane.size(); ++v) {
    const ExtendedComplex& z = plane[v];
    lifted.positions[v] = stereographic(z.is_infinite() ? z : ExtendedComplex(std::conj(z.value())));
  }
  return lifted;
}

void require_disk(const HalfedgeMesh& m, const char* which) {
  if (!m.has_positions() || m.num_components() != 1 || m.euler_characteristic() != 1 ||
      m.boundary_loops().size() != 1) {
    throw Error(ErrorKind::Topology, "weld",
                std::string(which) + " input is not a topological disk (Euler characteristic " +
                    std::to_string(m.euler_characteristic()) + ")");
  }
}

}  // namespace

DiskWeld weld_disks(const HalfedgeMesh& d0, const HalfedgeMesh& d1, const YamabeOptions& flow) {
  require_disk(d0, "first");
  require_disk(d1, "second");
  const std::vector<int> loop0 = d0.boundary_loops()[0];
  const std::vector<int> loop1 = d1.boundary_loops()[0];
  if (loop0.size() != loop1.size()) throw Error(ErrorKind::Topology, "weld", "disk boundaries differ in length");

  std::map<std::array<double, 3>, int> on_second;
  for (int v : loop1) {
    const Vec3& p = d1.position(v);
    on_second[{p.x(), p.y(), p.z()}] = v;
  }
  WeldingSignature sig;
  sig.first = loop0;
  for (int v : loop0) {
    const Vec3& p = d0.position(v);
    auto it = on_second.find({p.x(), p.y(), p.z()});
    if (it == on_second.end()) throw Error(ErrorKind::Topology, "weld", "boundary vertex has no partner");
    sig.second.push_back(it->second);
  }
  std::vector<int> pos1(d1.num_vertices(), -1);
  for (std::size_t k = 0; k < loop1.size(); ++k) pos1[loop1[k]] = static_cast<int>(k);
  const std::size_t n = loop0.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (static_cast<std::size_t>(pos1[sig.second[(k + 1) % n]]) != (pos1[sig.second[k]] + n - 1) % n) {
      throw Error(ErrorKind::Topology, "weld", "disks traverse the seam in the same direction");
    }
  }

  DiskWeld out;
  for (int s = 0; s < 2; ++s) {
    try {
      out.disks[s] = riemann_map(s == 0 ? d0 : d1, flow);
    } catch (const Error& e) {
      rethrow_in_stage(e, s == 0 ? "riemann map (side 0)" : "riemann map (side 1)");
    }
  }
  WeldedEmbedding w;
  try {
    w = zipper_weld(out.disks[0].embedding, out.disks[1].embedding, sig);
  } catch (const Error& e) {
    rethrow_in_stage(e, "weld");
  }
  out.seam_mismatch = w.seam_mismatch;

  std::vector<int> merged(d1.num_vertices(), -1);
  for (std::size_t k = 0; k < n; ++k) merged[sig.second[k]] = sig.first[k];
  std::vector<Vec3> pos = d0.positions();
  out.plane = w.positions.first;
  for (int v = 0; v < d1.num_vertices(); ++v) {
    if (merged[v] >= 0) continue;
    merged[v] = static_cast<int>(pos.size());
    pos.push_back(d1.position(v));
    out.plane.push_back(w.positions.second[v]);
  }
  std::vector<Face> faces = d0.faces();
  for (const Face& f : d1.faces()) faces.push_back({merged[f[0]], merged[f[1]], merged[f[2]]});
  const std::size_t nv = pos.size();
  out.mesh = HalfedgeMesh::build(nv, std::move(faces), std::move(pos));
  out.infinity_vertex = sig.first[w.infinity_seam_index];
  out.sphere = lift_plane(out.plane);
  return out;
}

SphericalEmbedding conformal_spherical_map(const HalfedgeMesh& input, const ConformalMapOptions& opts,
                                           ConformalMapStages* stages_out) {
  if (!input.has_positions()) throw Error(ErrorKind::InvalidArgument, "conformal", "mesh has no positions");
  if (!input.is_closed() || input.num_components() != 1 || input.euler_characteristic() != 2) {
    throw Error(ErrorKind::Topology, "conformal",
                "conformal map needs a closed genus-0 surface (Euler characteristic " +
                    std::to_string(input.euler_characteristic()) + ")");
  }
  ConformalMapStages local;
  ConformalMapStages& st = stages_out ? *stages_out : local;

  const HalfedgeMesh mesh = rescale_to_sphere_area(input, &st.scale);
  try {
    st.segmentation = segment_mesh(mesh, &st.eigen, &st.loop);
  } catch (const Error& e) {
    rethrow_in_stage(e, "segment");
  }
  const Segmentation& seg = st.segmentation;

  for (int s = 0; s < 2; ++s) {
    try {
      st.disks[s] = riemann_map(seg.disks[s].mesh, opts.flow);
    } catch (const Error& e) {
      rethrow_in_stage(e, s == 0 ? "riemann map (side 0)" : "riemann map (side 1)");
    }
  }

  try {
    st.weld = zipper_weld(st.disks[0].embedding, st.disks[1].embedding, welding_signature(seg));
  } catch (const Error& e) {
    rethrow_in_stage(e, "weld");
  }

  const int n = seg.split.num_vertices();
  st.plane.assign(n, ExtendedComplex());
  std::vector<char> assigned(n, 0);
  for (int s = 1; s >= 0; --s) {
    const auto& pts = s == 0 ? st.weld.positions.first : st.weld.positions.second;
    const auto& to_split = seg.disks[s].to_split;
    for (std::size_t i = 0; i < to_split.size(); ++i) {
      st.plane[to_split[i]] = pts[i];
      assigned[to_split[i]] = 1;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!assigned[v]) throw Error(ErrorKind::Topology, "weld", "vertex lost by the segmentation");
  }
  st.infinity_vertex = seg.seam[st.weld.infinity_seam_index];

  const SphericalEmbedding lifted = lift_plane(st.plane);

  auto [top, front] = default_landmarks(mesh);
  if (opts.top_landmark >= 0) top = opts.top_landmark;
  if (opts.front_landmark >= 0) front = opts.front_landmark;
  if (top >= seg.original_vertices || front >= seg.original_vertices) {
    throw Error(ErrorKind::InvalidArgument, "normalize", "landmark vertex out of range");
  }

  SphericalEmbedding normalized;
  try {
    normalized = mobius_normalize(lifted, vertex_area_weights(seg.split), top, front, opts.normalize, &st.normalize);
  } catch (const Error& e) {
    rethrow_in_stage(e, "normalize");
  }
  normalized.positions.resize(seg.original_vertices);
  return normalized;
}

}  // namespace sphereflow
