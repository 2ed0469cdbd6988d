#pragma once

#include <cstddef>
#include <functional>

namespace lseforge {

// Worker count resolution: an explicit positive request wins, otherwise the
// LSEFORGE_THREADS environment variable, otherwise 1.
int resolve_worker_count(int requested = 0);

// Runs fn(worker, block) for every block in [0, n_blocks) using at most
// `workers` threads. Worker w owns the contiguous block range
// [w*n/W, (w+1)*n/W) and visits it in ascending order, so any value written
// under block ownership sees the same operand order for every worker count.
// The worker index identifies which preallocated scratch set fn may use.
void parallel_blocks(std::size_t n_blocks, int workers,
                     const std::function<void(std::size_t, std::size_t)>& fn);

// Number of threads parallel_blocks will actually use for n_blocks.
std::size_t effective_workers(std::size_t n_blocks, int workers);

}  // namespace lseforge
