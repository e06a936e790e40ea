#include "sphereflow/spherical_omt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sphereflow/conformal_map.hpp"
#include "sphereflow/error.hpp"
#include "sphereflow/parallel.hpp"

namespace sphereflow {

namespace {

constexpr const char* kStage = "area map";
constexpr int kPoleCandidates = 64;
constexpr double kPoleClearance = 1e-3;

double circumradius(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double ab = (b - a).norm(), bc = (c - b).norm(), ca = (a - c).norm();
  const double area2 = (b - a).cross(c - a).norm();
  return area2 > 0 ? ab * bc * ca / (2.0 * area2) : std::numeric_limits<double>::infinity();
}

Vec2 to_plane(const Vec3& p) {
  const ExtendedComplex z = inverse_stereographic(p);
  return {z.real(), -z.imag()};
}

// Rotation sending the centroid of a large face to the north pole while
// every vertex keeps some distance from it.
Eigen::Matrix3d pole_rotation(const std::vector<Face>& faces, const std::vector<Vec3>& p, int& pole_face) {
  std::vector<double> radius(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) radius[f] = circumradius(p[faces[f][0]], p[faces[f][1]], p[faces[f][2]]);
  std::vector<int> order(faces.size());
  std::iota(order.begin(), order.end(), 0);
  const int k = std::min<int>(kPoleCandidates, static_cast<int>(order.size()));
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    return radius[a] > radius[b] || (radius[a] == radius[b] && a < b);
  });
  for (int c = 0; c < k; ++c) {
    const int f = order[c];
    const Vec3 centroid = (p[faces[f][0]] + p[faces[f][1]] + p[faces[f][2]]).normalized();
    const Eigen::Matrix3d rot = Eigen::Quaterniond::FromTwoVectors(centroid, Vec3::UnitZ()).toRotationMatrix();
    double clearance = std::numeric_limits<double>::infinity();
    for (const Vec3& q : p) clearance = std::min(clearance, (rot * q - Vec3::UnitZ()).norm());
    if (clearance < kPoleClearance) continue;
    pole_face = f;
    return rot;
  }
  throw Error(ErrorKind::Geometry, kStage, "every candidate pole is too close to a vertex");
}

}  // namespace

SphericalEmbedding balanced_map(const HalfedgeMesh& input, const SphericalEmbedding& conformal, double t,
                                const AreaMapOptions& options, AreaMapStages* stages_out) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, kStage, "t must lie in [0, 1]");
  if (!input.has_positions()) throw Error(ErrorKind::InvalidArgument, kStage, "mesh has no positions");
  const int n = input.num_vertices();
  if (static_cast<int>(conformal.positions.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, kStage, "embedding and mesh differ in vertex count");
  }
  if (!(options.clip_radius > 1.0)) throw Error(ErrorKind::InvalidArgument, kStage, "clip radius must exceed 1");
  if (t == 0.0) return conformal;

  const HalfedgeMesh mesh = rescale_to_sphere_area(input);
  auto [top, front] = default_landmarks(mesh);
  if (options.top_landmark >= 0) top = options.top_landmark;
  if (options.front_landmark >= 0) front = options.front_landmark;
  if (top >= n || front >= n) throw Error(ErrorKind::InvalidArgument, kStage, "landmark vertex out of range");

  AreaMapStages local;
  AreaMapStages& st = stages_out ? *stages_out : local;
  st.rotation = pole_rotation(mesh.faces(), conformal.positions, st.pole_face);
  st.sites.resize(n);
  for (int v = 0; v < n; ++v) st.sites[v] = to_plane(st.rotation * conformal.positions[v]);

  SourceDensity density = SourceDensity::spherical();
  const double t_conformal = 1.0 - t;
  if (t_conformal > 0.0) {
    const auto areas = face_areas(mesh);
    density = interpolate_density(t_conformal, SourceDensity::pushforward(st.sites, mesh.faces(), areas), density);
  }
  const ConvexDomain domain = ConvexDomain::disk(options.clip_radius);
  const double domain_mass = density.integrate(domain.boundary).mass;

  st.masses = vertex_area_weights(mesh);
  const double total = std::accumulate(st.masses.begin(), st.masses.end(), 0.0);
  for (double& m : st.masses) m *= domain_mass / total;

  try {
    st.omt = solve_omt({st.sites, st.masses, {}}, density, domain, options.omt);
    st.relocated.resize(n);
    parallel_for(n, [&](std::size_t v) {
      const Vec3 m = density.lifted_moment(st.omt.diagram.cells[v].polygon);
      // Back to the conjugated plane convention.
      st.relocated[v] = Vec3(m.x(), -m.y(), m.z()).normalized();
    });
    for (int v = 0; v < n; ++v) {
      if (!st.relocated[v].allFinite()) throw Error(ErrorKind::Geometry, kStage, "cell " + std::to_string(v) + " carries no mass");
    }
  } catch (const Error& e) {
    rethrow_in_stage(e, kStage);
  }

  SphericalEmbedding out;
  out.positions.resize(n);
  const Eigen::Matrix3d back = st.rotation.transpose();
  for (int v = 0; v < n; ++v) out.positions[v] = (back * st.relocated[v]).normalized();
  out = rotate(out, landmark_rotation(out.positions[top], out.positions[front]));
  for (Vec3& p : out.positions) p.normalize();
  return out;
}

SphericalEmbedding area_preserving_spherical_map(const HalfedgeMesh& mesh, const SphericalEmbedding& conformal,
                                                 const AreaMapOptions& options, AreaMapStages* stages) {
  return balanced_map(mesh, conformal, 1.0, options, stages);
}

}  // namespace sphereflow
