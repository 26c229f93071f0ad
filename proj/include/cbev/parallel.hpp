#pragma once

#include <cstddef>
#include <functional>

namespace cbev {

/// Resolves a worker count: explicit value if > 0, else CBEV_THREADS, else the
/// number of logical cores (at least 1).
int resolve_threads(int requested);

/// Runs body(i) for i in [0, count) across `threads` workers. Items are handed out
/// dynamically; the first exception thrown by any item is rethrown after all
/// workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

} // namespace cbev
