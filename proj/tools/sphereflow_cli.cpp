#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "sphereflow.h"

namespace fs = std::filesystem;

namespace {

// Exit codes by failure kind.
constexpr int kExitTopology = 1;
constexpr int kExitSolver = 2;
constexpr int kExitIo = 3;
constexpr int kExitUsage = 4;
constexpr int kExitGeometry = 5;
constexpr int kExitInternal = 6;

int exit_code(sf_status s) {
  switch (s) {
    case SF_OK: return 0;
    case SF_ERROR_TOPOLOGY: return kExitTopology;
    case SF_ERROR_SOLVER: return kExitSolver;
    case SF_ERROR_IO: return kExitIo;
    case SF_ERROR_INVALID_ARGUMENT: return kExitUsage;
    case SF_ERROR_GEOMETRY: return kExitGeometry;
    case SF_ERROR_INTERNAL: return kExitInternal;
  }
  return kExitInternal;
}

struct Failure {
  int code;
};

// Throws Failure after printing the stage-tagged message.
void check(sf_status s) {
  if (s == SF_OK) return;
  std::fprintf(stderr, "sphereflow: %s error: %s\n", sf_status_name(s), sf_last_error_message());
  throw Failure{exit_code(s)};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Mesh = Handle<sf_mesh, sf_mesh_free>;
using Embedding = Handle<sf_embedding, sf_embedding_free>;
using Report = Handle<sf_report, sf_report_free>;
using Segmentation = Handle<sf_segmentation, sf_segmentation_free>;
using Weld = Handle<sf_weld, sf_weld_free>;

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string format_t(double t) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, t);
  return std::string(buf, r.ptr);
}

struct Settings {
  std::string output = ".";
  double eps_yamabe = 0, eps_omt = 0, clip_radius = 0;
  std::vector<int> landmarks;
  bool trace = false;
  bool timings = false;
  sf_options options{};

  void add_to(CLI::App* app, bool solver_flags) {
    app->add_option("-o,--output", output, "Output directory")->capture_default_str();
    if (!solver_flags) return;
    sf_options_init(&options);
    eps_yamabe = options.yamabe_epsilon;
    eps_omt = options.omt_tolerance;
    clip_radius = options.clip_radius;
    app->add_option("--eps-yamabe", eps_yamabe, "Curvature residual tolerance of the flow")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--eps-omt", eps_omt, "Relative cell-mass tolerance of the transport solver")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--clip-radius", clip_radius, "Radius of the planar transport domain")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--landmarks", landmarks, "Top and front landmark vertex ids")->expected(2)->check(CLI::NonNegativeNumber);
    app->add_flag("--trace", trace, "Write solver traces as CSV");
    app->add_flag("--timings", timings, "Record wall-clock times in the reports");
  }

  sf_options resolved(const std::string& trace_prefix_storage) {
    sf_options o = options;
    o.yamabe_epsilon = eps_yamabe;
    o.omt_tolerance = eps_omt;
    o.clip_radius = clip_radius;
    if (landmarks.size() == 2) o.top_landmark = landmarks[0], o.front_landmark = landmarks[1];
    o.trace_prefix = trace ? trace_prefix_storage.c_str() : nullptr;
    return o;
  }

  std::string path(const std::string& file) const { return (fs::path(output) / file).string(); }
};

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    std::fprintf(stderr, "sphereflow: io error: cannot create output directory %s\n", dir.c_str());
    throw Failure{kExitIo};
  }
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

void load(const std::string& path, Mesh& mesh) {
  check(sf_mesh_load(path.c_str(), mesh.out()));
  std::fprintf(stderr, "loaded %s: %zu vertices, %zu faces\n", path.c_str(), sf_mesh_vertex_count(mesh.get()),
               sf_mesh_face_count(mesh.get()));
}

// Writes `<base>.obj` and `<base>.report.json` for one spherical map.
void emit_map(const Settings& cfg, const Mesh& mesh, const Embedding& e, const std::string& model,
              const std::string& base, double t, const std::vector<std::pair<std::string, double>>& stages,
              double runtime) {
  check(sf_embedding_save(e.get(), mesh.get(), cfg.path(base + ".obj").c_str()));
  Report r;
  check(sf_distortion_embedding(mesh.get(), e.get(), 1, r.out()));
  check(sf_report_set_label(r.get(), model.c_str(), t));
  if (cfg.timings) {
    for (const auto& [name, s] : stages) check(sf_report_add_stage_time(r.get(), name.c_str(), s));
    check(sf_report_set_runtime(r.get(), runtime));
  }
  check(sf_report_write_json(r.get(), cfg.path(base + ".report.json").c_str()));
  std::fprintf(stderr, "%s: angle_stat %.6f, area_stat %.6f, flipped %d\n", base.c_str(), sf_report_angle_stat(r.get()),
               sf_report_area_stat(r.get()), sf_report_flipped_faces(r.get()));
}

int run_map(Settings& cfg, const std::string& input, std::vector<double> ts, const char* single_suffix = nullptr) {
  ensure_directory(cfg.output);
  const std::string name = stem(input);
  Stopwatch clock;
  Mesh mesh;
  load(input, mesh);
  const double load_s = clock.lap();

  const std::string conformal_prefix = cfg.path(name + "_");
  const sf_options conformal_opts = cfg.resolved(conformal_prefix);
  Embedding conformal;
  check(sf_conformal_map(mesh.get(), &conformal_opts, conformal.out()));
  const double conformal_s = clock.lap();
  std::fprintf(stderr, "conformal map: %.3f s\n", conformal_s);

  for (double t : ts) {
    const std::string base = single_suffix ? name + single_suffix : name + "_t" + format_t(t);
    const std::string prefix = cfg.path(base + "_");
    const sf_options opts = cfg.resolved(prefix);
    Embedding e;
    check(sf_balanced_map(mesh.get(), conformal.get(), t, &opts, e.out()));
    const double balanced_s = clock.lap();
    std::fprintf(stderr, "balanced map t=%s: %.3f s\n", format_t(t).c_str(), balanced_s);
    std::vector<std::pair<std::string, double>> stages{{"load", load_s}, {"conformal", conformal_s}};
    if (t > 0) stages.emplace_back("area", balanced_s);
    double runtime = 0;
    for (const auto& st : stages) runtime += st.second;
    emit_map(cfg, mesh, e, name, base, t, stages, runtime);
  }
  return 0;
}

int run_segment(Settings& cfg, const std::string& input) {
  ensure_directory(cfg.output);
  const std::string name = stem(input);
  Mesh mesh;
  load(input, mesh);
  Segmentation seg;
  check(sf_segment(mesh.get(), seg.out()));
  for (int side = 0; side < 2; ++side) {
    Mesh disk;
    check(sf_segmentation_disk(seg.get(), side, disk.out()));
    check(sf_mesh_save(disk.get(), cfg.path(name + "_disk" + std::to_string(side) + ".obj").c_str()));
  }
  check(sf_segmentation_write_loop(seg.get(), cfg.path(name + "_loop.obj").c_str()));
  check(sf_segmentation_write_eigenfunction(seg.get(), cfg.path(name + "_f0.csv").c_str()));
  std::fprintf(stderr, "eigenvalue %.9g, loop length %.9g, area ratio %.9g\n", sf_segmentation_eigenvalue(seg.get()),
               sf_segmentation_loop_length(seg.get()), sf_segmentation_area_ratio(seg.get()));
  for (size_t k = 0; k < sf_segmentation_warning_count(seg.get()); ++k) {
    std::fprintf(stderr, "warning: %s\n", sf_segmentation_warning(seg.get(), k));
  }
  return 0;
}

int run_weld(Settings& cfg, const std::string& first, const std::string& second, std::string name) {
  ensure_directory(cfg.output);
  if (name.empty()) name = stem(first);
  Mesh d0, d1;
  load(first, d0);
  load(second, d1);
  const std::string prefix = cfg.path(name + "_");
  const sf_options opts = cfg.resolved(prefix);
  Weld w;
  check(sf_weld_disks(d0.get(), d1.get(), &opts, w.out()));
  check(sf_weld_write_plane(w.get(), cfg.path(name + "_weld_plane.obj").c_str()));
  check(sf_weld_write_sphere(w.get(), cfg.path(name + "_weld_sphere.obj").c_str()));
  check(sf_weld_write_sidecar(w.get(), cfg.path(name + "_weld.json").c_str()));
  std::fprintf(stderr, "welded: vertex %d at infinity, seam mismatch %.3g\n", sf_weld_infinity_vertex(w.get()),
               sf_weld_seam_mismatch(w.get()));
  return 0;
}

int run_distortion(Settings& cfg, const std::string& source, const std::string& image, bool csv, bool normalize,
                   std::string model) {
  ensure_directory(cfg.output);
  const std::string name = stem(image);
  if (model.empty()) model = stem(source);
  Mesh src, img;
  load(source, src);
  load(image, img);
  Report r;
  check(sf_distortion(src.get(), img.get(), normalize ? 1 : 0, r.out()));
  check(sf_report_set_label(r.get(), model.c_str(), NAN));
  check(sf_report_write_json(r.get(), cfg.path(name + ".report.json").c_str()));
  if (csv) {
    check(sf_report_write_csv(r.get(), cfg.path(name + ".area.csv").c_str(), SF_CSV_AREA));
    check(sf_report_write_csv(r.get(), cfg.path(name + ".angle.csv").c_str(), SF_CSV_ANGLE));
    check(sf_report_write_csv(r.get(), cfg.path(name + ".face.csv").c_str(), SF_CSV_FACE));
  }
  std::fprintf(stderr, "angle_stat %.9g, area_stat %.9g, flipped %d\n", sf_report_angle_stat(r.get()),
               sf_report_area_stat(r.get()), sf_report_flipped_faces(r.get()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical parameterization of genus-zero meshes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sf_version());

  Settings map_cfg, conf_cfg, area_cfg, seg_cfg, weld_cfg, dist_cfg;
  std::string map_in, conf_in, area_in, seg_in, weld_a, weld_b, weld_name, dist_src, dist_img, dist_model;
  std::vector<double> ts{0.0, 0.5, 1.0};
  bool dist_csv = false, dist_normalize = false;

  auto* map = app.add_subcommand("map", "Balanced spherical maps at each t, with reports");
  map->add_option("input", map_in, "Closed genus-zero mesh (OBJ or OFF)")->required();
  map->add_option("--t", ts, "Trade-off values: 0 conformal, 1 area-preserving")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  map_cfg.add_to(map, true);

  auto* conf = app.add_subcommand("conformal", "Conformal spherical map");
  conf->add_option("input", conf_in, "Closed genus-zero mesh")->required();
  conf_cfg.add_to(conf, true);

  auto* area = app.add_subcommand("area", "Area-preserving spherical map");
  area->add_option("input", area_in, "Closed genus-zero mesh")->required();
  area_cfg.add_to(area, true);

  auto* seg = app.add_subcommand("segment", "Cut along the first eigenfunction's zero loop into two disks");
  seg->add_option("input", seg_in, "Closed genus-zero mesh")->required();
  seg_cfg.add_to(seg, false);

  auto* weld = app.add_subcommand("weld", "Riemann-map two disks and weld them into the plane");
  weld->add_option("first", weld_a, "First disk mesh")->required();
  weld->add_option("second", weld_b, "Second disk mesh")->required();
  weld->add_option("--name", weld_name, "Output name (default: stem of the first disk)");
  weld_cfg.add_to(weld, true);

  auto* dist = app.add_subcommand("distortion", "Distortion report of an image mesh against its source");
  dist->add_option("source", dist_src, "Source mesh")->required();
  dist->add_option("image", dist_img, "Image mesh with the same connectivity")->required();
  dist->add_flag("--csv", dist_csv, "Also write per-vertex, per-corner and per-face CSV tables");
  dist->add_flag("--normalize-area", dist_normalize, "Scale the source to the image's total area first");
  dist->add_option("--model", dist_model, "Model name stored in the report");
  dist_cfg.add_to(dist, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*map) return run_map(map_cfg, map_in, ts);
    if (*conf) return run_map(conf_cfg, conf_in, {0.0}, "_conformal");
    if (*area) return run_map(area_cfg, area_in, {1.0}, "_area");
    if (*seg) return run_segment(seg_cfg, seg_in);
    if (*weld) return run_weld(weld_cfg, weld_a, weld_b, weld_name);
    if (*dist) return run_distortion(dist_cfg, dist_src, dist_img, dist_csv, dist_normalize, dist_model);
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitUsage;
}
