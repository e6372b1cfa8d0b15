#pragma once

#include <cstddef>
#include <functional>

namespace lpdsvm {

int hardware_threads();

// Runs fn(task) for task in [0, num_tasks) on up to num_threads workers.
// Tasks are claimed from a shared counter, so execution order is unspecified;
// callers must write results to pre-assigned slots. The first exception
// thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t num_tasks, int num_threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace lpdsvm
