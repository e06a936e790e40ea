#include "sphereflow/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sphereflow/error.hpp"

namespace sphereflow {
namespace {

using nlohmann::ordered_json;
constexpr const char* kStage = "report";
constexpr const char* kAreaStatDefinition =
    "area-weighted mean of s_max*s_min + 1/(s_max*s_min); completed from the area-preserving condition "
    "s_max*s_min = 1";

ordered_json to_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

ordered_json to_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}

Histogram histogram_from(const ordered_json& j) {
  Histogram h;
  j.at("edges").get_to(h.edges);
  j.at("counts").get_to(h.counts);
  if (h.edges.size() != h.counts.size() + 1) throw Error(ErrorKind::Io, kStage, "histogram edges and counts disagree");
  return h;
}

Summary summary_from(const ordered_json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("min").get<double>(),
          j.at("max").get<double>()};
}

std::optional<double> optional_number(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

void append_number(std::string& out, double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, r.ptr);
}

void append_int(std::string& out, long x) {
  char buf[24];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, r.ptr);
}

}  // namespace

ReportRecord make_record(const DistortionReport& report, std::string model, std::optional<double> t) {
  ReportRecord r;
  r.model = std::move(model);
  r.vertices = static_cast<int>(report.area.values.size());
  r.faces = static_cast<int>(report.jacobian.face_angle.size());
  r.t = t;
  r.angle_stat = report.jacobian.angle_stat;
  r.area_stat = report.jacobian.area_stat;
  r.flipped_faces = report.jacobian.flipped_faces;
  r.area_normalized = report.area_normalized;
  r.angle_hist = report.angle.histogram;
  r.area_hist = report.area.histogram;
  r.angle_summary = report.angle.summary;
  r.area_summary = report.area.summary;
  return r;
}

std::string report_json(const ReportRecord& r) {
  ordered_json j;
  j["schema"] = "sphereflow.distortion";
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = r.model;
  j["vertices"] = r.vertices;
  j["faces"] = r.faces;
  j["t"] = r.t ? ordered_json(*r.t) : ordered_json(nullptr);
  j["angle_stat"] = r.angle_stat;
  j["area_stat"] = r.area_stat;
  j["area_stat_definition"] = kAreaStatDefinition;
  j["flipped_faces"] = r.flipped_faces;
  j["area_normalized"] = r.area_normalized;
  j["angle_hist"] = to_json(r.angle_hist);
  j["area_hist"] = to_json(r.area_hist);
  j["angle_summary"] = to_json(r.angle_summary);
  j["area_summary"] = to_json(r.area_summary);
  j["runtime_seconds"] = r.runtime_seconds ? ordered_json(*r.runtime_seconds) : ordered_json(nullptr);
  ordered_json stages = ordered_json::object();
  for (const auto& [name, seconds] : r.stage_seconds) stages[name] = seconds;
  j["stage_seconds"] = stages;
  return j.dump(2) + "\n";
}

ReportRecord parse_report_json(const std::string& text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw Error(ErrorKind::Io, kStage, "unsupported report schema version");
    }
    ReportRecord r;
    j.at("model").get_to(r.model);
    j.at("vertices").get_to(r.vertices);
    j.at("faces").get_to(r.faces);
    r.t = optional_number(j, "t");
    j.at("angle_stat").get_to(r.angle_stat);
    j.at("area_stat").get_to(r.area_stat);
    j.at("flipped_faces").get_to(r.flipped_faces);
    j.at("area_normalized").get_to(r.area_normalized);
    r.angle_hist = histogram_from(j.at("angle_hist"));
    r.area_hist = histogram_from(j.at("area_hist"));
    r.angle_summary = summary_from(j.at("angle_summary"));
    r.area_summary = summary_from(j.at("area_summary"));
    r.runtime_seconds = optional_number(j, "runtime_seconds");
    if (j.contains("stage_seconds")) {
      for (const auto& [name, seconds] : j.at("stage_seconds").items()) r.stage_seconds.emplace_back(name, seconds.get<double>());
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, kStage, std::string("malformed report: ") + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, kStage, "cannot open " + path + " for writing");
  out << text;
  if (!out.flush()) throw Error(ErrorKind::Io, kStage, "failed writing " + path);
}

void write_report_json(const std::string& path, const ReportRecord& record) {
  write_text_file(path, report_json(record));
}

ReportRecord read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, kStage, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report_json(ss.str());
}

std::string report_csv(const DistortionReport& report, CsvTable table) {
  std::string out;
  switch (table) {
    case CsvTable::Area:
      out = "vertex,epsilon\n";
      for (std::size_t v = 0; v < report.area.values.size(); ++v) {
        append_int(out, static_cast<long>(v));
        out += ',';
        append_number(out, report.area.values[v]);
        out += '\n';
      }
      break;
    case CsvTable::Angle:
      out = "halfedge,face,corner,eta\n";
      for (std::size_t h = 0; h < report.angle.values.size(); ++h) {
        append_int(out, static_cast<long>(h));
        out += ',';
        append_int(out, static_cast<long>(h / 3));
        out += ',';
        append_int(out, static_cast<long>(h % 3));
        out += ',';
        append_number(out, report.angle.values[h]);
        out += '\n';
      }
      break;
    case CsvTable::Face: {
      const auto& j = report.jacobian;
      out = "face,sigma_max,sigma_min,angle,area\n";
      for (std::size_t f = 0; f < j.face_angle.size(); ++f) {
        append_int(out, static_cast<long>(f));
        for (double x : {j.sigma_max[f], j.sigma_min[f], j.face_angle[f], j.face_area[f]}) {
          out += ',';
          append_number(out, x);
        }
        out += '\n';
      }
      break;
    }
  }
  return out;
}

void write_report_csv(const std::string& path, const DistortionReport& report, CsvTable table) {
  write_text_file(path, report_csv(report, table));
}

}  // namespace sphereflow
