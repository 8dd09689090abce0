#pragma once

#include <cstddef>
#include <functional>

namespace hodgemix {

// Maximum worker count: HODGEMIX_THREADS if set (>= 1), else hardware
// concurrency.
int thread_limit();

// Runs fn(0) .. fn(n_tasks-1) on up to max_threads workers (0 = thread_limit()).
// Tasks are claimed from a shared counter; each task writes its own result
// slot, so results are independent of scheduling. The first exception thrown
// by any task is re-thrown on the calling thread after all workers join.
void parallel_tasks(std::size_t n_tasks, int max_threads,
                    const std::function<void(std::size_t)>& fn);

}  // namespace hodgemix
