#include "sphereflow.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "sphereflow/conformal_map.hpp"
#include "sphereflow/distortion.hpp"
#include "sphereflow/error.hpp"
#include "sphereflow/mesh_io.hpp"
#include "sphereflow/parallel.hpp"
#include "sphereflow/report.hpp"
#include "sphereflow/spherical_omt.hpp"

using namespace sphereflow;

struct sf_mesh {
  HalfedgeMesh mesh;
};

struct sf_embedding {
  SphericalEmbedding embedding;
};

struct sf_report {
  DistortionReport report;
  ReportRecord record;
};

struct sf_segmentation {
  Segmentation segmentation;
  EigenFunction eigen;
  CutLoop loop;
};

struct sf_weld {
  DiskWeld weld;
};

namespace {

thread_local std::string g_message;
thread_local std::string g_stage;

sf_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return SF_ERROR_INVALID_ARGUMENT;
    case ErrorKind::Topology: return SF_ERROR_TOPOLOGY;
    case ErrorKind::Solver: return SF_ERROR_SOLVER;
    case ErrorKind::Io: return SF_ERROR_IO;
    case ErrorKind::Geometry: return SF_ERROR_GEOMETRY;
  }
  return SF_ERROR_INTERNAL;
}

sf_status fail(sf_status status, std::string stage, std::string message) {
  g_stage = std::move(stage);
  g_message = std::move(message);
  return status;
}

sf_status invalid(const char* message) { return fail(SF_ERROR_INVALID_ARGUMENT, "api", message); }

// Runs body and converts exceptions into a status.
template <class F>
sf_status guarded(F&& body) {
  try {
    body();
    return SF_OK;
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.stage(), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SF_ERROR_INTERNAL, "api", "out of memory");
  } catch (const std::exception& e) {
    return fail(SF_ERROR_INTERNAL, "api", e.what());
  }
}

ConformalMapOptions conformal_options(const sf_options* o) {
  ConformalMapOptions c;
  if (!o) return c;
  c.flow.epsilon = o->yamabe_epsilon;
  c.flow.max_iterations = o->yamabe_max_iterations;
  c.top_landmark = o->top_landmark;
  c.front_landmark = o->front_landmark;
  return c;
}

AreaMapOptions area_options(const sf_options* o) {
  AreaMapOptions a;
  if (!o) return a;
  a.omt.tolerance = o->omt_tolerance;
  a.omt.max_iterations = o->omt_max_iterations;
  a.clip_radius = o->clip_radius;
  a.top_landmark = o->top_landmark;
  a.front_landmark = o->front_landmark;
  return a;
}

void check_options(const sf_options* o) {
  if (!o) return;
  if (!(o->yamabe_epsilon > 0) || !(o->omt_tolerance > 0) || !(o->clip_radius > 0) ||
      o->yamabe_max_iterations < 1 || o->omt_max_iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, "options", "tolerances, iteration limits and clip radius must be positive");
  }
}

std::string trace_path(const sf_options* o, const char* suffix) {
  return o && o->trace_prefix ? std::string(o->trace_prefix) + suffix : std::string();
}

sf_status make_report(const HalfedgeMesh& source, const std::vector<Vec3>& image, int normalize_area,
                      sf_report** out) {
  if (!out) return invalid("null output pointer");
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<sf_report>();
    r->report = distortion_report(source, image, {normalize_area != 0});
    r->record = make_record(r->report, "");
    *out = r.release();
  });
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "0.1.0"; }

const char* sf_status_name(sf_status status) {
  switch (status) {
    case SF_OK: return "ok";
    case SF_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case SF_ERROR_TOPOLOGY: return "topology";
    case SF_ERROR_SOLVER: return "solver";
    case SF_ERROR_IO: return "io";
    case SF_ERROR_GEOMETRY: return "geometry";
    case SF_ERROR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sf_last_error_message(void) { return g_message.c_str(); }
const char* sf_last_error_stage(void) { return g_stage.c_str(); }

sf_status sf_set_thread_count(int threads) {
  if (threads < 0) return invalid("thread count must be nonnegative");
  set_thread_count(static_cast<std::size_t>(threads));
  return SF_OK;
}

int sf_thread_count(void) { return static_cast<int>(thread_count()); }

void sf_options_init(sf_options* o) {
  if (!o) return;
  const ConformalMapOptions c;
  const AreaMapOptions a;
  o->yamabe_epsilon = c.flow.epsilon;
  o->yamabe_max_iterations = c.flow.max_iterations;
  o->omt_tolerance = a.omt.tolerance;
  o->omt_max_iterations = a.omt.max_iterations;
  o->clip_radius = a.clip_radius;
  o->top_landmark = -1;
  o->front_landmark = -1;
  o->trace_prefix = nullptr;
}

sf_status sf_mesh_load(const char* path, sf_mesh** out) {
  if (!path || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new sf_mesh{load_mesh(path)}; });
}

sf_status sf_mesh_create(size_t num_vertices, const double* xyz, size_t num_faces, const int* faces, sf_mesh** out) {
  if (!out || (num_vertices && !xyz) || (num_faces && !faces)) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    std::vector<Vec3> p(num_vertices);
    for (size_t v = 0; v < num_vertices; ++v) p[v] = Vec3(xyz[3 * v], xyz[3 * v + 1], xyz[3 * v + 2]);
    std::vector<Face> f(num_faces);
    for (size_t k = 0; k < num_faces; ++k) f[k] = {faces[3 * k], faces[3 * k + 1], faces[3 * k + 2]};
    *out = new sf_mesh{HalfedgeMesh::build(num_vertices, std::move(f), std::move(p))};
  });
}

void sf_mesh_free(sf_mesh* mesh) { delete mesh; }

size_t sf_mesh_vertex_count(const sf_mesh* mesh) { return mesh ? mesh->mesh.num_vertices() : 0; }
size_t sf_mesh_face_count(const sf_mesh* mesh) { return mesh ? mesh->mesh.num_faces() : 0; }
int sf_mesh_euler_characteristic(const sf_mesh* mesh) { return mesh ? mesh->mesh.euler_characteristic() : 0; }

sf_status sf_mesh_copy_positions(const sf_mesh* mesh, double* xyz) {
  if (!mesh || !xyz) return invalid("null argument");
  const auto& p = mesh->mesh.positions();
  for (size_t v = 0; v < p.size(); ++v) std::memcpy(xyz + 3 * v, p[v].data(), 3 * sizeof(double));
  return SF_OK;
}

sf_status sf_mesh_copy_faces(const sf_mesh* mesh, int* faces) {
  if (!mesh || !faces) return invalid("null argument");
  const auto& f = mesh->mesh.faces();
  for (size_t k = 0; k < f.size(); ++k) std::memcpy(faces + 3 * k, f[k].data(), 3 * sizeof(int));
  return SF_OK;
}

sf_status sf_mesh_save(const sf_mesh* mesh, const char* path) {
  if (!mesh || !path) return invalid("null argument");
  return guarded([&] { write_mesh(path, mesh->mesh.positions(), mesh->mesh.faces()); });
}

sf_status sf_conformal_map(const sf_mesh* mesh, const sf_options* options, sf_embedding** out) {
  if (!mesh || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    check_options(options);
    ConformalMapStages st;
    auto e = std::make_unique<sf_embedding>();
    e->embedding = conformal_spherical_map(mesh->mesh, conformal_options(options), &st);
    if (const auto prefix = trace_path(options, ""); !prefix.empty()) {
      write_yamabe_trace(prefix + "yamabe_side0.csv", st.disks[0].flow_trace);
      write_yamabe_trace(prefix + "yamabe_side1.csv", st.disks[1].flow_trace);
    }
    *out = e.release();
  });
}

sf_status sf_balanced_map(const sf_mesh* mesh, const sf_embedding* conformal, double t, const sf_options* options,
                          sf_embedding** out) {
  if (!mesh || !conformal || !out) return invalid("null argument");
  *out = nullptr;
  if (!(t >= 0.0 && t <= 1.0)) return invalid("t must lie in [0, 1]");
  return guarded([&] {
    check_options(options);
    AreaMapStages st;
    auto e = std::make_unique<sf_embedding>();
    e->embedding = balanced_map(mesh->mesh, conformal->embedding, t, area_options(options), &st);
    if (const auto path = trace_path(options, "omt.csv"); !path.empty() && t > 0.0) {
      write_omt_trace(path, st.omt.trace);
    }
    *out = e.release();
  });
}

void sf_embedding_free(sf_embedding* embedding) { delete embedding; }

size_t sf_embedding_vertex_count(const sf_embedding* embedding) {
  return embedding ? embedding->embedding.positions.size() : 0;
}

sf_status sf_embedding_copy_positions(const sf_embedding* embedding, double* xyz) {
  if (!embedding || !xyz) return invalid("null argument");
  const auto& p = embedding->embedding.positions;
  for (size_t v = 0; v < p.size(); ++v) std::memcpy(xyz + 3 * v, p[v].data(), 3 * sizeof(double));
  return SF_OK;
}

int sf_embedding_flipped_faces(const sf_embedding* embedding, const sf_mesh* mesh) {
  if (!embedding || !mesh || embedding->embedding.positions.size() != static_cast<size_t>(mesh->mesh.num_vertices())) {
    return -1;
  }
  return count_flipped(mesh->mesh.faces(), embedding->embedding);
}

sf_status sf_embedding_save(const sf_embedding* embedding, const sf_mesh* mesh, const char* path) {
  if (!embedding || !mesh || !path) return invalid("null argument");
  if (embedding->embedding.positions.size() != static_cast<size_t>(mesh->mesh.num_vertices())) {
    return invalid("embedding and mesh differ in vertex count");
  }
  return guarded([&] { write_mesh(path, embedding->embedding.positions, mesh->mesh.faces()); });
}

sf_status sf_distortion(const sf_mesh* source, const sf_mesh* image, int normalize_area, sf_report** out) {
  if (!source || !image || !out) return invalid("null argument");
  *out = nullptr;
  if (source->mesh.faces() != image->mesh.faces() || source->mesh.num_vertices() != image->mesh.num_vertices()) {
    return fail(SF_ERROR_INVALID_ARGUMENT, "distortion", "[distortion] source and image connectivity differ");
  }
  return make_report(source->mesh, image->mesh.positions(), normalize_area, out);
}

sf_status sf_distortion_embedding(const sf_mesh* source, const sf_embedding* image, int normalize_area,
                                  sf_report** out) {
  if (!source || !image || !out) return invalid("null argument");
  return make_report(source->mesh, image->embedding.positions, normalize_area, out);
}

void sf_report_free(sf_report* report) { delete report; }
double sf_report_angle_stat(const sf_report* report) { return report ? report->record.angle_stat : NAN; }
double sf_report_area_stat(const sf_report* report) { return report ? report->record.area_stat : NAN; }
int sf_report_flipped_faces(const sf_report* report) { return report ? report->record.flipped_faces : -1; }

sf_status sf_report_set_label(sf_report* report, const char* model, double t) {
  if (!report) return invalid("null argument");
  if (!std::isnan(t) && !(t >= 0.0 && t <= 1.0)) return invalid("t must lie in [0, 1]");
  report->record.model = model ? model : "";
  report->record.t = std::isnan(t) ? std::nullopt : std::optional<double>(t);
  return SF_OK;
}

sf_status sf_report_set_runtime(sf_report* report, double seconds) {
  if (!report || !(seconds >= 0.0)) return invalid("runtime must be nonnegative");
  report->record.runtime_seconds = seconds;
  return SF_OK;
}

sf_status sf_report_add_stage_time(sf_report* report, const char* stage, double seconds) {
  if (!report || !stage || !(seconds >= 0.0)) return invalid("stage time needs a name and a nonnegative value");
  report->record.stage_seconds.emplace_back(stage, seconds);
  return SF_OK;
}

sf_status sf_report_json(const sf_report* report, char* buffer, size_t capacity, size_t* length) {
  if (!report || !length) return invalid("null argument");
  return guarded([&] {
    const std::string text = report_json(report->record);
    *length = text.size();
    if (buffer && capacity > text.size()) std::memcpy(buffer, text.c_str(), text.size() + 1);
  });
}

sf_status sf_report_write_json(const sf_report* report, const char* path) {
  if (!report || !path) return invalid("null argument");
  return guarded([&] { write_report_json(path, report->record); });
}

sf_status sf_report_write_csv(const sf_report* report, const char* path, sf_csv_table table) {
  if (!report || !path) return invalid("null argument");
  if (table < SF_CSV_AREA || table > SF_CSV_FACE) return invalid("unknown CSV table");
  return guarded([&] { write_report_csv(path, report->report, static_cast<CsvTable>(table)); });
}

sf_status sf_segment(const sf_mesh* mesh, sf_segmentation** out) {
  if (!mesh || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<sf_segmentation>();
    s->segmentation = segment_mesh(mesh->mesh, &s->eigen, &s->loop);
    *out = s.release();
  });
}

void sf_segmentation_free(sf_segmentation* segmentation) { delete segmentation; }

sf_status sf_segmentation_disk(const sf_segmentation* s, int side, sf_mesh** out) {
  if (!s || !out) return invalid("null argument");
  if (side != 0 && side != 1) return invalid("side must be 0 or 1");
  *out = nullptr;
  return guarded([&] { *out = new sf_mesh{s->segmentation.disks[side].mesh}; });
}

double sf_segmentation_area_ratio(const sf_segmentation* s) { return s ? s->segmentation.area_ratio : NAN; }
double sf_segmentation_eigenvalue(const sf_segmentation* s) { return s ? s->eigen.eigenvalue : NAN; }
double sf_segmentation_loop_length(const sf_segmentation* s) { return s ? s->loop.length : NAN; }
size_t sf_segmentation_warning_count(const sf_segmentation* s) { return s ? s->segmentation.warnings.size() : 0; }

const char* sf_segmentation_warning(const sf_segmentation* s, size_t index) {
  if (!s || index >= s->segmentation.warnings.size()) return nullptr;
  return s->segmentation.warnings[index].c_str();
}

sf_status sf_segmentation_write_loop(const sf_segmentation* s, const char* path) {
  if (!s || !path) return invalid("null argument");
  return guarded([&] {
    std::vector<Vec3> pts;
    for (const LoopPoint& p : s->loop.points) pts.push_back(p.position);
    write_polyline_obj(path, pts, true);
  });
}

sf_status sf_segmentation_write_eigenfunction(const sf_segmentation* s, const char* path) {
  if (!s || !path) return invalid("null argument");
  return guarded([&] { write_scalar_csv(path, s->eigen.values); });
}

sf_status sf_weld_disks(const sf_mesh* first, const sf_mesh* second, const sf_options* options, sf_weld** out) {
  if (!first || !second || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    check_options(options);
    auto w = std::make_unique<sf_weld>();
    w->weld = weld_disks(first->mesh, second->mesh, conformal_options(options).flow);
    if (const auto prefix = trace_path(options, ""); !prefix.empty()) {
      write_yamabe_trace(prefix + "yamabe_side0.csv", w->weld.disks[0].flow_trace);
      write_yamabe_trace(prefix + "yamabe_side1.csv", w->weld.disks[1].flow_trace);
    }
    *out = w.release();
  });
}

void sf_weld_free(sf_weld* weld) { delete weld; }
int sf_weld_infinity_vertex(const sf_weld* weld) { return weld ? weld->weld.infinity_vertex : -1; }
double sf_weld_seam_mismatch(const sf_weld* weld) { return weld ? weld->weld.seam_mismatch : NAN; }

sf_status sf_weld_mesh(const sf_weld* weld, sf_mesh** out) {
  if (!weld || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new sf_mesh{weld->weld.mesh}; });
}

sf_status sf_weld_write_plane(const sf_weld* weld, const char* path) {
  if (!weld || !path) return invalid("null argument");
  return guarded([&] {
    std::vector<Vec2> p;
    for (const ExtendedComplex& z : weld->weld.plane) {
      p.push_back(z.is_infinite() ? Vec2(0, 0) : Vec2(z.real(), z.imag()));
    }
    write_mesh(path, p, weld->weld.mesh.faces());
  });
}

sf_status sf_weld_write_sphere(const sf_weld* weld, const char* path) {
  if (!weld || !path) return invalid("null argument");
  return guarded([&] {
    const auto centered = center_mass(weld->weld.sphere, vertex_area_weights(weld->weld.mesh));
    write_mesh(path, centered.positions, weld->weld.mesh.faces());
  });
}

sf_status sf_weld_write_sidecar(const sf_weld* weld, const char* path) {
  if (!weld || !path) return invalid("null argument");
  return guarded([&] {
    nlohmann::ordered_json j;
    j["vertices"] = weld->weld.mesh.num_vertices();
    j["faces"] = weld->weld.mesh.num_faces();
    j["infinity_vertex"] = weld->weld.infinity_vertex;
    j["infinity_placeholder"] = {0.0, 0.0};
    j["seam_mismatch"] = weld->weld.seam_mismatch;
    write_text_file(path, j.dump(2) + "\n");
  });
}

}  // extern "C"
