#pragma once

#include <cstddef>
#include <functional>

namespace lipspray {

/// Worker count: LIPSPRAY_THREADS when set and positive, otherwise the
/// hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, count) on up to worker_count() threads. The
/// exception thrown at the lowest index, if any, is rethrown after all
/// workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace lipspray
