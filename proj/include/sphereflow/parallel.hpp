#pragma once

#include <cstddef>
#include <functional>

namespace sphereflow {

/// Worker count: SPHEREFLOW_THREADS if set (>= 1), else hardware concurrency.
std::size_t thread_count();

/// Override the worker count for the current process (0 restores the default).
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Each index is processed exactly once and
/// bodies must only write to per-index slots, so results do not depend on
/// the number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sphereflow
