#include "sphereflow/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace sphereflow::primitives {

namespace {

constexpr double kPi = std::numbers::pi;

HalfedgeMesh from(std::vector<Vec3> positions, std::vector<Face> faces) {
  const std::size_t n = positions.size();
  return HalfedgeMesh::build(n, std::move(faces), std::move(positions));
}

}  // namespace

HalfedgeMesh tetrahedron(double edge) {
  const double s = edge / (2.0 * std::sqrt(2.0));
  std::vector<Vec3> p{{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  return from(p, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}});
}

HalfedgeMesh octahedron() {
  std::vector<Vec3> p{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  return from(p, {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                  {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}});
}

HalfedgeMesh icosphere(int frequency) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> ico{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  const std::vector<Face> ico_faces{{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
                                    {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                    {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
                                    {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  const int n = frequency;
  std::vector<Vec3> positions;
  std::vector<Face> faces;
  // Lattice points are identified by integer barycentric weights on the
  // icosahedron corners, which makes shared edges match exactly.
  std::map<std::tuple<int, int, int, int, int, int>, int> index;
  auto vertex = [&](const Face& f, int i, int j) {
    int w[3] = {n - i - j, i, j};
    std::array<std::pair<int, int>, 3> key{{{f[0], w[0]}, {f[1], w[1]}, {f[2], w[2]}}};
    std::sort(key.begin(), key.end());
    // Drop zero weights so the key does not depend on the face.
    std::array<std::pair<int, int>, 3> canon{{{-1, 0}, {-1, 0}, {-1, 0}}};
    int m = 0;
    for (auto& kw : key) if (kw.second != 0) canon[m++] = kw;
    auto k = std::make_tuple(canon[0].first, canon[0].second, canon[1].first, canon[1].second,
                             canon[2].first, canon[2].second);
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    Vec3 p = (w[0] * ico[f[0]] + w[1] * ico[f[1]] + w[2] * ico[f[2]]) / n;
    positions.push_back(p.normalized());
    int id = static_cast<int>(positions.size()) - 1;
    index.emplace(k, id);
    return id;
  };
  for (const Face& f : ico_faces) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; i + j < n; ++j) {
        faces.push_back({vertex(f, i, j), vertex(f, i + 1, j), vertex(f, i, j + 1)});
        if (i + j + 2 <= n) {
          faces.push_back({vertex(f, i + 1, j), vertex(f, i + 1, j + 1), vertex(f, i, j + 1)});
        }
      }
    }
  }
  return from(std::move(positions), std::move(faces));
}

HalfedgeMesh ellipsoid(int frequency, double a, double b, double c) {
  HalfedgeMesh m = icosphere(frequency);
  std::vector<Vec3> p = m.positions();
  for (Vec3& x : p) x = Vec3(a * x.x(), b * x.y(), c * x.z());
  m.set_positions(std::move(p));
  return m;
}

HalfedgeMesh lumpy_sphere(int frequency) {
  HalfedgeMesh m = icosphere(frequency);
  std::vector<Vec3> p = m.positions();
  for (Vec3& x : p) {
    double r = 1.0 + 0.18 * std::sin(3.0 * x.x() + 0.5) * std::cos(2.0 * x.y()) +
               0.12 * std::exp(-8.0 * (x - Vec3(0.3, 0.5, 0.81).normalized()).squaredNorm()) +
               0.1 * x.z() * x.z();
    x = Vec3(1.2 * r * x.x(), r * x.y(), 0.9 * r * x.z());
  }
  m.set_positions(std::move(p));
  return m;
}

HalfedgeMesh dumbbell(int frequency) {
  HalfedgeMesh m = icosphere(frequency);
  std::vector<Vec3> p = m.positions();
  for (Vec3& x : p) {
    double s = 0.35 + 0.65 * 0.5 * (1.0 - std::cos(2.0 * kPi * x.z()));
    x = Vec3(s * x.x(), s * x.y(), 2.0 * x.z());
  }
  m.set_positions(std::move(p));
  return m;
}

HalfedgeMesh square_grid(int n) {
  std::vector<Vec3> p;
  std::vector<Face> faces;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) p.emplace_back(double(i) / n, double(j) / n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return from(std::move(p), std::move(faces));
}

HalfedgeMesh equilateral_grid(int rows, int cols) {
  std::vector<Vec3> p;
  std::vector<Face> faces;
  auto id = [cols](int i, int j) { return j * (cols + 1) + i; };
  const double h = std::sqrt(3.0) / 2.0;
  for (int j = 0; j <= rows; ++j)
    for (int i = 0; i <= cols; ++i) p.emplace_back(i + 0.5 * j, h * j, 0.0);
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
      faces.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return from(std::move(p), std::move(faces));
}

HalfedgeMesh unit_disk(int rings) {
  std::vector<Vec3> p{{0, 0, 0}};
  std::vector<std::vector<int>> ring(rings + 1);
  ring[0] = {0};
  for (int k = 1; k <= rings; ++k) {
    const int count = 6 * k;
    for (int s = 0; s < count; ++s) {
      double a = 2.0 * kPi * s / count;
      double r = double(k) / rings;
      ring[k].push_back(static_cast<int>(p.size()));
      p.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
  }
  std::vector<Face> faces;
  for (int k = 1; k <= rings; ++k) {
    const auto& in = ring[k - 1];
    const auto& out = ring[k];
    const int m = static_cast<int>(in.size()), n = static_cast<int>(out.size());
    if (m == 1) {
      for (int j = 0; j < n; ++j) faces.push_back({out[j], out[(j + 1) % n], in[0]});
      continue;
    }
    // Merge the two rings by angle.
    int i = 0, j = 0;
    while (i < m || j < n) {
      double next_in = double(i + 1) / m, next_out = double(j + 1) / n;
      if (j < n && (i >= m || next_out <= next_in)) {
        faces.push_back({out[j], out[(j + 1) % n], in[i % m]});
        ++j;
      } else {
        faces.push_back({in[i], out[j % n], in[(i + 1) % m]});
        ++i;
      }
    }
  }
  return from(std::move(p), std::move(faces));
}

HalfedgeMesh cylinder(double circumference, double height, int around, int along) {
  const double r = circumference / (2.0 * around * std::sin(kPi / around));
  std::vector<Vec3> p;
  std::vector<Face> faces;
  auto id = [around](int i, int j) { return j * around + (i % around); };
  for (int j = 0; j <= along; ++j)
    for (int i = 0; i < around; ++i) {
      double a = 2.0 * kPi * i / around;
      p.emplace_back(r * std::cos(a), r * std::sin(a), height * j / along);
    }
  for (int j = 0; j < along; ++j)
    for (int i = 0; i < around; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return from(std::move(p), std::move(faces));
}

HalfedgeMesh sphere_band(int frequency, double cap_height) {
  HalfedgeMesh s = icosphere(frequency);
  std::vector<Face> kept;
  for (const Face& f : s.faces()) {
    Vec3 c = (s.position(f[0]) + s.position(f[1]) + s.position(f[2])) / 3.0;
    if (std::abs(c.z()) <= cap_height) kept.push_back(f);
  }
  std::vector<int> remap(s.num_vertices(), -1);
  std::vector<Vec3> p;
  for (Face& f : kept)
    for (int& v : f) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(p.size());
        p.push_back(s.position(v));
      }
      v = remap[v];
    }
  return from(std::move(p), std::move(kept));
}

HalfedgeMesh torus(double major, double minor, int around, int along) {
  std::vector<Vec3> p;
  std::vector<Face> faces;
  auto id = [&](int i, int j) { return (j % along) * around + (i % around); };
  for (int j = 0; j < along; ++j)
    for (int i = 0; i < around; ++i) {
      double u = 2.0 * kPi * i / around, v = 2.0 * kPi * j / along;
      double r = major + minor * std::cos(v);
      p.emplace_back(r * std::cos(u), r * std::sin(u), minor * std::sin(v));
    }
  for (int j = 0; j < along; ++j)
    for (int i = 0; i < around; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return from(std::move(p), std::move(faces));
}

}  // namespace sphereflow::primitives
