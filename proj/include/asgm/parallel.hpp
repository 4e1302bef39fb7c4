#pragma once

#include <functional>

namespace asgm {

/// Run fn(0..n-1) across up to `threads` workers (0 = hardware concurrency).
/// Work items must be independent; any exception is rethrown after all
/// workers join. Results must not depend on the thread count.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

int resolve_thread_count(int requested);

}  // namespace asgm
