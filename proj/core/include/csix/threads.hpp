#pragma once

#include <cstddef>
#include <functional>

namespace csix {

/// Worker-thread count: CSIX_THREADS when set (clamped to >= 1), otherwise
/// the hardware concurrency.
int thread_count();

/// Runs fn(i) for every i in [0, n), splitting the range into contiguous
/// chunks across worker threads. fn must only touch per-index state, so the
/// result is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace csix
