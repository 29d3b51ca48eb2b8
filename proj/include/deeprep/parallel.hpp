#pragma once

#include <cstdint>
#include <functional>

namespace deeprep {

// Global cap for internal worker threads. 1 (the default) runs everything
// on the calling thread. Parallel loops only ever split independent
// per-slice work with disjoint writes, so results do not depend on the cap.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, count). Splits into contiguous chunks across
// at most max_threads() threads.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn);

}  // namespace deeprep
