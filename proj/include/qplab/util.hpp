#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace qplab::util {

// Worker count for sweep ops: explicit override beats QPLAB_THREADS beats
// min(hardware_concurrency, 8).
int worker_count();
void set_worker_count(int n);  // n <= 0 restores the default

// Runs f(i) for i in [0, n), statically partitioned over the workers.
// Each index must touch only its own output slot, so results are identical
// for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& range_fn);
void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& f);

// Pairwise reduction with a fixed tree topology; the floating-point result
// does not depend on how the work was split across threads.
double tree_sum(const std::vector<double>& v);
double tree_mean(const std::vector<double>& v);

}
