#pragma once

// Deterministic work distribution. Tasks are indexed; each task derives its
// own RNG stream from (master seed, index), and results are written into
// index-addressed slots, so output never depends on the thread count.

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace otr {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(i) for i in [0, count) on up to `threads` workers.
/// The first exception thrown by any task is rethrown on the caller.
inline void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& body) {
  threads = resolve_threads(threads);
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int n_workers = static_cast<int>(std::min<std::int64_t>(threads, count));
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace otr
