#pragma once
#include <cstdint>
#include <functional>

namespace vlab {

// Worker budget: VORTEX_THREADS when set (oversubscription allowed, results
// are bitwise identical either way), else hardware concurrency, at least 1.
// Read from the environment on every call so tests can flip it.
int worker_count();

// Runs body(begin, end) over a contiguous partition of [0, n).
// Bodies must only write to their own slice; reductions happen after the
// join, in index order, so results never depend on the worker count.
void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

} // namespace vlab
