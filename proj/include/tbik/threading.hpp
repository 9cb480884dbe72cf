#pragma once

// Deterministic work partitioning. Workers get statically assigned,
// disjoint index ranges, so results never depend on scheduling or on the
// worker count. TBIK_THREADS pins the count; unset falls back to the
// hardware concurrency.

#include <cstdint>
#include <functional>

namespace tbik {

int worker_count();

// Overrides the TBIK_THREADS-derived default for the current process.
// n <= 0 restores env/default behaviour.
void set_worker_count(int n);

// Runs fn(i) for i in [0, n). Chunks are contiguous per worker.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace tbik
