#pragma once

#include <cstddef>
#include <functional>

namespace lgsq {

/// Worker count: `requested` if positive, else LGI_THREADS, else the number of cores.
int resolve_threads(int requested = 0);

/// Calls fn(i) for every i in [0, n) on up to `threads` workers.
///
/// Indices are claimed from a shared counter, so callers must write results by
/// index; the outcome is then independent of scheduling. The first exception
/// thrown by fn is rethrown after all workers have joined.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace lgsq
