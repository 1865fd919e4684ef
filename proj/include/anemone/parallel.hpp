#pragma once

#include <cstddef>
#include <functional>

namespace anemone {

// Worker count: ANEMONE_THREADS when set and positive, otherwise the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) across up to worker_count() threads. Each index
// runs exactly once; callers must make fn(i) write only to slot i. The first
// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace anemone
