#pragma once

#include <cstddef>
#include <functional>

namespace ppe {

/// Worker cap shared by the parallel loops (0 = hardware concurrency).
void set_worker_threads(std::size_t n);
std::size_t worker_threads();

/// Runs fn(i) for i in [begin, end). Each index must write only its own
/// output slot; results are then independent of scheduling.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& fn);

}  // namespace ppe
