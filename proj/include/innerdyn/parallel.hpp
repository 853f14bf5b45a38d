#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace innerdyn {

// Thread-count resolution: INNER_DYN_THREADS env var overrides everything,
// then an explicit program override (CLI flag), then hardware concurrency.
// Work is partitioned by index only and results must be written to
// per-index slots, so outputs are identical for every thread count.

inline int& thread_override() {
  static int value = 0;
  return value;
}

inline int effective_threads() {
  if (const char* env = std::getenv("INNER_DYN_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (thread_override() > 0) return thread_override();
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

template <typename Fn>
void parallel_for(std::int64_t n, const Fn& fn) {
  int threads = effective_threads();
  if (threads <= 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  const std::int64_t chunk = std::max<std::int64_t>(1, n / (8 * threads));
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::int64_t begin = next.fetch_add(chunk);
        if (begin >= n || failed.load(std::memory_order_relaxed)) return;
        std::int64_t end = std::min(n, begin + chunk);
        try {
          for (std::int64_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed) std::rethrow_exception(first_error);
}

}
