#pragma once

#include <functional>

namespace msoc {

/// Runs fn(i) for i in [begin, end) on up to `threads` workers (0 = hardware
/// concurrency, 1 = serial). Results must be written to disjoint slots; the
/// call returns after all workers finish. Exceptions are rethrown.
void parallel_for(int begin, int end, int threads, const std::function<void(int)>& fn);

} // namespace msoc
