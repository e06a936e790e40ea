#pragma once

#include "sphereflow/mesh.hpp"

namespace sphereflow::primitives {

/// Regular tetrahedron with the given edge length.
HalfedgeMesh tetrahedron(double edge = 1.0);
/// Unit octahedron (vertices at +-e_i).
HalfedgeMesh octahedron();
/// Geodesic sphere: each icosahedron face split into frequency^2 triangles,
/// vertices projected to the unit sphere. 20*frequency^2 faces.
HalfedgeMesh icosphere(int frequency);
/// icosphere scaled by (a, b, c) along x, y, z.
HalfedgeMesh ellipsoid(int frequency, double a, double b, double c);
/// Star-shaped sphere with smooth radial bumps, a stand-in for scanned models.
HalfedgeMesh lumpy_sphere(int frequency);
/// Unit-square grid with n x n cells, each split along its (0,0)-(1,1) diagonal.
HalfedgeMesh square_grid(int n);
/// Patch of the equilateral lattice with unit edges, rows x cols parallelograms.
HalfedgeMesh equilateral_grid(int rows, int cols);
/// Unit disk from concentric rings; 6 * rings^2 faces.
HalfedgeMesh unit_disk(int rings);
/// Open prism cylinder of polygon perimeter `circumference`, axis along z.
HalfedgeMesh cylinder(double circumference, double height, int around, int along);
/// icosphere without the faces whose centroid has |z| > cap_height.
HalfedgeMesh sphere_band(int frequency, double cap_height);
/// Icosphere stretched along z into two lobes joined by a neck at z = 0.
HalfedgeMesh dumbbell(int frequency);
/// Ring torus (genus 1).
HalfedgeMesh torus(double major, double minor, int around, int along);

}  // namespace sphereflow::primitives
