#pragma once

#include <functional>

namespace partreg {

/// Thread budget: PARTREG_THREADS when set (clamped to >= 1), otherwise
/// the hardware concurrency.
int max_threads();

/// Runs fn(0..count-1) across up to `threads` threads. Work items must be
/// independent; writes go to per-index slots so output order is
/// deterministic. The first exception is rethrown after all workers join.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace partreg
