#include "mtlab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "mtlab/error.hpp"

namespace mtlab {

namespace {
std::atomic<int> g_threads{0};
}

int thread_count() {
  int n = g_threads.load();
  if (n > 0) return n;
  if (const char* env = std::getenv("MTLAB_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void set_thread_count(int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "thread count must be >= 0");
  g_threads = n;
}

void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, int)>& fn) {
  int t = thread_count();
  if (t <= 1 || n < 2) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (int c = 0; c < t; ++c) {
    std::size_t b = n * c / t, e = n * (c + 1) / t;
    pool.emplace_back([&, b, e, c] {
      try {
        fn(b, e, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& ep : errors)
    if (ep) std::rethrow_exception(ep);
}

}  // namespace mtlab
