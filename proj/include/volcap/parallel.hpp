#pragma once

#include <functional>

namespace volcap {

// Worker count used by the row-parallel kernels. 0 selects
// std::thread::hardware_concurrency(). Results never depend on this value.
void set_thread_count(unsigned count);
unsigned thread_count();

// Calls body(begin, end) on disjoint contiguous chunks of [0, n).
void parallel_for(int n, const std::function<void(int, int)>& body);

}  // namespace volcap
