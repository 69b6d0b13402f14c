#pragma once

#include <cstddef>
#include <functional>

namespace oste {

// Worker count from OSTE_NUM_THREADS, else the hardware concurrency (>= 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
// runs exactly once; callers write results into per-index slots so the
// outcome does not depend on scheduling. The exception of the lowest failing
// index is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace oste
