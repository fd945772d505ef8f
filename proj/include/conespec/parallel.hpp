#pragma once

#include <cstddef>
#include <functional>

namespace conespec {

/// Worker count: CONESPEC_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Calls fn(begin, end) on contiguous chunks of [0, n) from up to
/// worker_count() threads. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace conespec
