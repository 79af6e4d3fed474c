#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace subpoisson {

/// Number of worker threads: SUBPOISSON_THREADS env var wins, then `requested`
/// (0 = auto), then hardware concurrency.
inline int resolve_threads(int requested = 0) {
  if (const char* env = std::getenv("SUBPOISSON_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(i) for i in [0, count) on up to `threads` workers. Tasks are pure
/// w.r.t. shared state except their own output slot; exceptions are rethrown
/// on the calling thread.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::min(std::max(threads, 1), count);
  if (count <= 0) return;
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace subpoisson
