#pragma once

#include <functional>

namespace seqmag {

// Process-wide worker count for parallel loops; 0 restores the hardware
// default. Thread-safe.
void set_thread_count(int n);
int thread_count();

// Runs fn(i) for i in [0, count) on up to thread_count() workers. Exceptions
// are captured and the first one rethrown after all workers join. Results
// must be written to per-index slots; the loop imposes no ordering.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace seqmag
