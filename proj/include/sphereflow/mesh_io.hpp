#pragma once

#include <string>
#include <vector>

#include "sphereflow/mesh.hpp"

namespace sphereflow {

enum class MeshFormat { Obj, Off };

/// Format from the file extension (.obj / .off, case-insensitive).
MeshFormat format_from_path(const std::string& path);

/// Reads an OBJ (v/f records, 1-based, negative indices allowed) or OFF file.
/// Parse failures and unreadable files raise Error(Io); polygons with other
/// than three corners raise Error(Topology, "non-triangular face").
HalfedgeMesh load_mesh(const std::string& path);
HalfedgeMesh load_mesh(const std::string& path, MeshFormat format);

/// Writes positions and faces with 17 significant digits.
void write_mesh(const std::string& path, const std::vector<Vec3>& positions,
                const std::vector<Face>& faces, MeshFormat format);
void write_mesh(const std::string& path, const std::vector<Vec3>& positions,
                const std::vector<Face>& faces);

/// Planar coordinates are written with z = 0.
void write_mesh(const std::string& path, const std::vector<Vec2>& positions,
                const std::vector<Face>& faces);

/// OBJ polyline ("l" record); closed loops repeat the first index.
void write_polyline_obj(const std::string& path, const std::vector<Vec3>& points, bool closed);

}  // namespace sphereflow
