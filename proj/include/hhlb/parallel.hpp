#pragma once

#include <cstddef>
#include <functional>

namespace hhlb {

/// Worker count: HHLB_THREADS if set, otherwise hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads.  Work items
/// must write to disjoint outputs; callers reduce afterwards in index order so
/// results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hhlb
