#pragma once

#include <cstddef>
#include <functional>

namespace rieszlab {

// Worker count from RIESZLAB_THREADS (default: hardware concurrency, min 1).
unsigned worker_count();

// Splits [begin, end) into contiguous blocks and calls body(lo, hi) on each,
// possibly concurrently. Callers write only to disjoint outputs; every
// reduction is done afterwards in index order, so results do not depend on
// the worker count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace rieszlab
