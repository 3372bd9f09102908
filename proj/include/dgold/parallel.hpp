#pragma once

#include <cstddef>
#include <functional>

namespace dgold {

/// Worker cap: DEEPGOLD_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n), split into contiguous chunks over at most
/// thread_count() threads. body must only write to index-owned state, so
/// results never depend on the schedule. The first exception thrown by any
/// chunk is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dgold
