#pragma once

#include <cstddef>
#include <functional>

namespace pdduq {

// 0 means "use all logical cores".
unsigned resolve_threads(unsigned requested);

// Runs fn(i) for i in [0, count) on up to `threads` workers. Tasks are
// claimed dynamically; callers write results into per-index slots so the
// outcome does not depend on the worker count. The first exception thrown
// by any task is rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace pdduq
