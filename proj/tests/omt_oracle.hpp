#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sphereflow/mesh.hpp"

namespace testutil {

/// Cell masses of the envelope max_i <q, y_i> + h_i under uniform density on
/// the unit square, by counting pixel centers of an n x n grid.
inline std::vector<double> grid_masses(const std::vector<sphereflow::Vec2>& y, const std::vector<double>& h,
                                       int n) {
  std::vector<long> count(y.size(), 0);
  const double d = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * d;
    for (int j = 0; j < n; ++j) {
      const double z = (j + 0.5) * d;
      std::size_t best = 0;
      double best_u = -1e300;
      for (std::size_t k = 0; k < y.size(); ++k) {
        const double u = x * y[k].x() + z * y[k].y() + h[k];
        if (u > best_u) best_u = u, best = k;
      }
      ++count[best];
    }
  }
  std::vector<double> w(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) w[k] = static_cast<double>(count[k]) * d * d;
  return w;
}

/// Heights matching `masses` on the grid by gradient steps on the dual
/// energy with Barzilai-Borwein step lengths; only grid_masses is used.
/// Mean-zero on return.
inline std::vector<double> grid_height_search(const std::vector<sphereflow::Vec2>& y,
                                              const std::vector<double>& masses, int n, int rounds = 300) {
  const std::size_t k = y.size();
  std::vector<double> h(k), prev_h, prev_g;
  for (std::size_t i = 0; i < k; ++i) h[i] = -0.5 * y[i].squaredNorm();
  double step = 0.1;
  const double pixel = 1.0 / (static_cast<double>(n) * n);
  for (int r = 0; r < rounds; ++r) {
    const auto w = grid_masses(y, h, n);
    std::vector<double> g(k);
    double err = 0;
    for (std::size_t i = 0; i < k; ++i) g[i] = w[i] - masses[i], err = std::max(err, std::abs(g[i]));
    if (err <= 2.0 * pixel) break;
    if (!prev_g.empty()) {
      double ss = 0, sy = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const double s = h[i] - prev_h[i], t = g[i] - prev_g[i];
        ss += s * s, sy += s * t;
      }
      if (sy > 0) step = std::min(1.0, ss / sy);
    }
    prev_h = h, prev_g = g;
    for (std::size_t i = 0; i < k; ++i) h[i] -= step * g[i];
  }
  double mean = 0;
  for (double x : h) mean += x;
  mean /= static_cast<double>(k);
  for (double& x : h) x -= mean;
  return h;
}

}  // namespace testutil
