#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "sphereflow/mesh.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sphereflow_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Two triangles sharing the edge (v0, v1); apexes v2 (left) and v3 (right).
inline sphereflow::HalfedgeMesh quad(sphereflow::Vec3 a, sphereflow::Vec3 b, sphereflow::Vec3 c,
                                     sphereflow::Vec3 d) {
  return sphereflow::HalfedgeMesh::build(4, {{0, 1, 2}, {1, 0, 3}}, {a, b, c, d});
}

inline int shared_edge(const sphereflow::HalfedgeMesh& m, int a, int b) {
  for (int e = 0; e < m.num_edges(); ++e) {
    auto v = m.edge_vertices(e);
    if ((v[0] == a && v[1] == b) || (v[0] == b && v[1] == a)) return e;
  }
  return -1;
}

/// Corner angle at p in triangle (p, q, r) from the dot product; independent
/// of the library's half-angle formula.
inline double acos_angle(const sphereflow::Vec3& p, const sphereflow::Vec3& q,
                         const sphereflow::Vec3& r) {
  sphereflow::Vec3 u = (q - p).normalized(), v = (r - p).normalized();
  return std::acos(std::clamp(u.dot(v), -1.0, 1.0));
}

}  // namespace testutil
