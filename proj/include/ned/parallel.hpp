#pragma once

#include <cstddef>
#include <functional>

namespace ned {

// Worker count used by grid sweeps and trajectory ensembles (>= 1).
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [0, n). Work is split into contiguous static chunks,
// so results written by index are independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ned
