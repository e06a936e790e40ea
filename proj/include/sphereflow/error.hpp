#pragma once

#include <stdexcept>
#include <string>

namespace sphereflow {

enum class ErrorKind {
  InvalidArgument,
  Topology,
  Solver,
  Io,
  Geometry,
};

const char* to_string(ErrorKind kind);

/// Exception thrown by every module. `stage` names the pipeline step that
/// failed ("load", "yamabe", "zipper", ...) so CLI messages can be tagged.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  /// The message without the stage tag.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string stage_;
  std::string detail_;
};

/// Re-raise `e` with `stage` prefixed, keeping its kind.
[[noreturn]] void rethrow_in_stage(const Error& e, const std::string& stage);

}  // namespace sphereflow
