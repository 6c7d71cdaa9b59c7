#pragma once

#include <cstddef>
#include <functional>

namespace igabem {

/// Worker count used when a call passes threads <= 0. Defaults to the hardware
/// concurrency.
int default_threads();
void set_default_threads(int threads);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Iterations must write to
/// disjoint storage; the first exception thrown by any iteration is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace igabem
