#include "sphereflow/error.hpp"

namespace sphereflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Io: return "io";
    case ErrorKind::Geometry: return "geometry";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string stage, const std::string& message)
    : std::runtime_error("[" + stage + "] " + message), kind_(kind), stage_(std::move(stage)), detail_(message) {}

void rethrow_in_stage(const Error& e, const std::string& stage) {
  throw Error(e.kind(), stage + "/" + e.stage(), e.detail());
}

}  // namespace sphereflow
