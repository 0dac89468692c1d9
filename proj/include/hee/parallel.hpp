#pragma once

#include <cstddef>
#include <functional>

namespace hee {

/// Worker cap for parallel loops. HEE_THREADS, when set to a positive
/// integer, overrides the value passed to set_thread_count(). Defaults to
/// the hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index
/// must write only its own output slot; results are then independent of the
/// thread count. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hee
