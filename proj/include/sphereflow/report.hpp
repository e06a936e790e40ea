#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sphereflow/distortion.hpp"

namespace sphereflow {

inline constexpr int kReportSchemaVersion = 1;

/// Serialized form of a distortion report: summaries and histograms, no raw
/// samples. Field names match the JSON keys.
struct ReportRecord {
  std::string model;
  int vertices = 0;
  int faces = 0;
  /// Trade-off parameter of a balanced map; empty for standalone reports.
  std::optional<double> t;
  double angle_stat = 0;
  double area_stat = 0;
  int flipped_faces = 0;
  bool area_normalized = false;
  Histogram angle_hist;
  Histogram area_hist;
  Summary angle_summary;
  Summary area_summary;
  /// Wall-clock time; empty unless the caller opts in, so reports of
  /// identical inputs stay byte-identical.
  std::optional<double> runtime_seconds;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

ReportRecord make_record(const DistortionReport& report, std::string model, std::optional<double> t = {});

/// Pretty-printed JSON with a trailing newline; shortest round-trip doubles.
std::string report_json(const ReportRecord& record);
/// Inverse of report_json. Throws Error(Io) on malformed input or a schema
/// version other than kReportSchemaVersion.
ReportRecord parse_report_json(const std::string& text);

void write_report_json(const std::string& path, const ReportRecord& record);
ReportRecord read_report_json(const std::string& path);

enum class CsvTable {
  /// vertex,epsilon
  Area,
  /// halfedge,face,corner,eta
  Angle,
  /// face,sigma_max,sigma_min,angle,area
  Face,
};

/// Raw per-element values, one row per vertex, corner or face after a header.
std::string report_csv(const DistortionReport& report, CsvTable table);
void write_report_csv(const std::string& path, const DistortionReport& report, CsvTable table);

/// Writes `text` to `path`, raising Error(Io) on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sphereflow
