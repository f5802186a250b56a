#pragma once

#include <cstddef>
#include <functional>

namespace fleximo {

// Worker count for internal parallelism: FLEXIMO_THREADS if set (0 = auto),
// otherwise the hardware concurrency. Always at least 1.
std::size_t thread_count();

// Runs fn(i) for i in [0, n). Work items must write disjoint slots so the
// result is identical to the sequential loop regardless of thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace fleximo
