#pragma once

#include <cstddef>
#include <functional>

namespace qcdyn {

// Worker count used by grid kernels. Defaults to QCDYN_THREADS when set,
// otherwise the hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [0, n). Each index writes only its own output slot,
// so results do not depend on the worker count. If any call throws, the
// exception from the lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qcdyn
