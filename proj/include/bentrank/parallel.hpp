#pragma once

#include <cstddef>
#include <functional>

namespace bentrank {

/// Thread count from the BENTRANK_THREADS environment variable, or 1.
int default_threads();

/// Runs body(i) for i in [0, count) on up to `threads` threads. Results must
/// be written to per-index slots; the first exception is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace bentrank
