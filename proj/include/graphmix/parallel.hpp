#pragma once

#include <functional>

namespace graphmix {

// Worker count for row-parallel kernels: GRAPHMIX_THREADS if set, otherwise
// min(hardware concurrency, 4). Always at least 1.
int worker_count();

// Runs task(i) for every i in [0, count) across the pool. Tasks must write
// disjoint state; scheduling order is unspecified.
void parallel_tasks(int count, const std::function<void(int)>& task);

// True while executing inside a pool task; nested dispatch runs inline.
bool inside_parallel_task();

// Runs fn(begin, end) over a fixed contiguous partition of [0, n). Each index
// is handled by exactly one invocation, so kernels that write disjoint output
// rows produce bit-identical results at any worker count.
void parallel_rows(int n, const std::function<void(int, int)>& fn);

}  // namespace graphmix
