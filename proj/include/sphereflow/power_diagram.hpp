#pragma once

#include <array>
#include <string>
#include <vector>

#include "sphereflow/mesh.hpp"

namespace sphereflow {

/// Counter-clockwise polygon.
using Polygon = std::vector<Vec2>;

double polygon_area(const Polygon& polygon);

/// Keeps the part of `polygon` (convex) where <normal, q> <= offset.
Polygon clip_polygon(const Polygon& polygon, const Vec2& normal, double offset);

/// Pow(q, p) = |p - q|^2 + weight.
double power_distance(const Vec2& q, const Vec2& p, double weight);

/// Converts the upper-envelope heights H of max_i <q, y_i> + H_i to power
/// weights w_i = -2 H_i - |y_i|^2 (same cells), and back.
std::vector<double> power_weights_from_heights(const std::vector<Vec2>& sites, const std::vector<double>& heights);
std::vector<double> heights_from_power_weights(const std::vector<Vec2>& sites, const std::vector<double>& weights);

/// Convex working domain.
struct ConvexDomain {
  Polygon boundary;
  static ConvexDomain box(const Vec2& lo, const Vec2& hi);
  /// Regular polygon inscribed in the circle of the given radius.
  static ConvexDomain disk(double radius, int segments = 512);
};

struct PowerCell {
  /// Cell clipped to the domain; empty if the cell misses it.
  Polygon polygon;
  /// neighbors[k] is the site across edge polygon[k] -> polygon[k+1], or -1
  /// on the domain boundary.
  std::vector<int> neighbors;
  bool empty() const { return polygon.size() < 3; }
};

struct PowerDiagram {
  std::vector<PowerCell> cells;
  /// Sites that are not vertices of the regular triangulation (empty cells).
  std::vector<char> hidden;
  /// Regular triangulation of the visible sites, counter-clockwise.
  std::vector<std::array<int, 3>> triangles;

  std::vector<int> empty_cells() const;
};

/// Cells {q : Pow(q, y_i, w_i) <= Pow(q, y_j, w_j) for all j}, clipped to
/// `domain`. Built from an incremental regular triangulation;
/// every cell is clipped exactly against its triangulation 2-ring. Throws
/// Error(InvalidArgument) on duplicate sites or non-finite input.
PowerDiagram power_diagram(const std::vector<Vec2>& sites, const std::vector<double>& weights,
                           const ConvexDomain& domain);

/// Polygon soup OBJ (one face per non-empty cell) for inspection.
void write_power_diagram_obj(const std::string& path, const PowerDiagram& diagram);

}  // namespace sphereflow
