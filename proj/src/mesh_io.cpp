#include "sphereflow/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "sphereflow/error.hpp"

namespace sphereflow {

namespace {

const char* kStage = "io";

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_error(const std::string& path, long line, const std::string& what) {
  throw Error(ErrorKind::Io, kStage, path + ":" + std::to_string(line) + ": " + what);
}

struct RawMesh {
  std::vector<Vec3> positions;
  std::vector<Face> faces;
};

void check_triangle(const std::vector<long>& polygon, const std::string& path, long line) {
  if (polygon.size() != 3) {
    throw Error(ErrorKind::Topology, kStage,
                path + ":" + std::to_string(line) + ": non-triangular face with " +
                    std::to_string(polygon.size()) + " corners");
  }
}

RawMesh read_obj(std::istream& in, const std::string& path) {
  RawMesh raw;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) parse_error(path, lineno, "malformed vertex");
      raw.positions.push_back(p);
    } else if (tag == "f") {
      std::vector<long> polygon;
      std::string token;
      while (ss >> token) {
        long idx = 0;
        try {
          idx = std::stol(token.substr(0, token.find('/')));
        } catch (const std::exception&) {
          parse_error(path, lineno, "malformed face index '" + token + "'");
        }
        if (idx < 0) idx += static_cast<long>(raw.positions.size()) + 1;
        if (idx < 1) parse_error(path, lineno, "face index out of range");
        polygon.push_back(idx - 1);
      }
      check_triangle(polygon, path, lineno);
      raw.faces.push_back({static_cast<int>(polygon[0]), static_cast<int>(polygon[1]),
                           static_cast<int>(polygon[2])});
    }
  }
  return raw;
}

RawMesh read_off(std::istream& in, const std::string& path) {
  RawMesh raw;
  std::vector<std::string> tokens;
  std::vector<long> token_line;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = line.substr(0, line.find('#'));
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) {
      tokens.push_back(t);
      token_line.push_back(lineno);
    }
  }
  std::size_t pos = 0;
  auto next_token = [&]() -> const std::string& {
    if (pos >= tokens.size()) parse_error(path, lineno, "unexpected end of file");
    return tokens[pos++];
  };
  auto next_number = [&]() {
    const std::string& t = next_token();
    try {
      std::size_t used = 0;
      double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      parse_error(path, token_line[pos - 1], "malformed number '" + t + "'");
    }
  };
  if (pos < tokens.size() && lower(tokens[0]) == "off") ++pos;
  const long nv = static_cast<long>(next_number());
  const long nf = static_cast<long>(next_number());
  next_number();
  if (nv < 0 || nf < 0) parse_error(path, 1, "negative element count");
  raw.positions.resize(nv);
  for (long v = 0; v < nv; ++v) {
    for (int k = 0; k < 3; ++k) raw.positions[v][k] = next_number();
  }
  for (long f = 0; f < nf; ++f) {
    const long line_of_face = pos < token_line.size() ? token_line[pos] : lineno;
    const long n = static_cast<long>(next_number());
    std::vector<long> polygon(std::max(n, 0L));
    for (auto& idx : polygon) idx = static_cast<long>(next_number());
    check_triangle(polygon, path, line_of_face);
    for (long idx : polygon) {
      if (idx < 0 || idx >= nv) parse_error(path, line_of_face, "face index out of range");
    }
    raw.faces.push_back({static_cast<int>(polygon[0]), static_cast<int>(polygon[1]),
                         static_cast<int>(polygon[2])});
  }
  return raw;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

std::unique_ptr<std::FILE, FileCloser> open_for_write(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "w"));
  if (!f) throw Error(ErrorKind::Io, kStage, "cannot open '" + path + "' for writing");
  return f;
}

void finish(std::FILE* f, const std::string& path) {
  if (std::ferror(f) || std::fflush(f) != 0) {
    throw Error(ErrorKind::Io, kStage, "write failure on '" + path + "'");
  }
}

}  // namespace

MeshFormat format_from_path(const std::string& path) {
  const std::string p = lower(path);
  auto ends_with = [&](const std::string& s) {
    return p.size() >= s.size() && p.compare(p.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with(".obj")) return MeshFormat::Obj;
  if (ends_with(".off")) return MeshFormat::Off;
  throw Error(ErrorKind::InvalidArgument, kStage, "unknown mesh format for '" + path + "'");
}

HalfedgeMesh load_mesh(const std::string& path) { return load_mesh(path, format_from_path(path)); }

HalfedgeMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, kStage, "cannot open '" + path + "'");
  RawMesh raw = format == MeshFormat::Obj ? read_obj(in, path) : read_off(in, path);
  if (raw.faces.empty()) throw Error(ErrorKind::Io, kStage, "'" + path + "' has no faces");
  const std::size_t nv = raw.positions.size();
  return HalfedgeMesh::build(nv, std::move(raw.faces), std::move(raw.positions));
}

void write_mesh(const std::string& path, const std::vector<Vec3>& positions,
                const std::vector<Face>& faces, MeshFormat format) {
  auto f = open_for_write(path);
  if (format == MeshFormat::Obj) {
    for (const Vec3& p : positions) std::fprintf(f.get(), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    for (const Face& t : faces) std::fprintf(f.get(), "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
  } else {
    std::fprintf(f.get(), "OFF\n%zu %zu 0\n", positions.size(), faces.size());
    for (const Vec3& p : positions) std::fprintf(f.get(), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    for (const Face& t : faces) std::fprintf(f.get(), "3 %d %d %d\n", t[0], t[1], t[2]);
  }
  finish(f.get(), path);
}

void write_mesh(const std::string& path, const std::vector<Vec3>& positions,
                const std::vector<Face>& faces) {
  write_mesh(path, positions, faces, format_from_path(path));
}

void write_mesh(const std::string& path, const std::vector<Vec2>& positions,
                const std::vector<Face>& faces) {
  std::vector<Vec3> lifted;
  lifted.reserve(positions.size());
  for (const Vec2& p : positions) lifted.emplace_back(p.x(), p.y(), 0.0);
  write_mesh(path, lifted, faces);
}

void write_polyline_obj(const std::string& path, const std::vector<Vec3>& points, bool closed) {
  auto f = open_for_write(path);
  for (const Vec3& p : points) std::fprintf(f.get(), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
  std::fprintf(f.get(), "l");
  for (std::size_t i = 0; i < points.size(); ++i) std::fprintf(f.get(), " %zu", i + 1);
  if (closed && !points.empty()) std::fprintf(f.get(), " 1");
  std::fprintf(f.get(), "\n");
  finish(f.get(), path);
}

}  // namespace sphereflow
