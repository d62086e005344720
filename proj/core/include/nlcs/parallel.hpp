#pragma once

#include <cstddef>
#include <functional>

namespace nlcs {

/// Hardware concurrency, capped by the NLCS_THREADS environment variable.
int default_thread_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. threads <= 1 runs inline.
/// Callers write results into per-index slots, so output is independent of
/// the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace nlcs
