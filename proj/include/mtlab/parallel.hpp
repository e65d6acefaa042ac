#pragma once

#include <functional>

namespace mtlab {

// Worker count: set_thread_count wins, else MTLAB_THREADS, else 1.
int thread_count();
void set_thread_count(int n);

// Splits [0, n) into thread_count() contiguous chunks; fn(begin, end, chunk) runs once per chunk.
// Chunk boundaries depend only on n and the thread count, so per-chunk buffers merge deterministically.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, int)>& fn);

}  // namespace mtlab
