#pragma once

#include <cstddef>
#include <functional>

namespace incompat {

/// Worker cap for all internal parallel loops (0 = hardware concurrency).
void set_thread_count(int n);
int thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count; callers that need bit-reproducible
/// results write into per-index slots and reduce afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace incompat
