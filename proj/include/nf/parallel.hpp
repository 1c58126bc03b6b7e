#pragma once

#include <cstddef>
#include <functional>

namespace nf {

/// Worker count: NF_THREADS if set (>= 1), otherwise hardware concurrency.
int default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = default).
/// Each index runs exactly once; callers store results by index so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

} // namespace nf
