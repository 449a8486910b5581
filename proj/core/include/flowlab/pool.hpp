#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace flowlab {

// runs fn(i) for i in [0, n) across `workers` threads (0 = hardware
// concurrency). Callers pre-allocate one output slot per index, so results
// never depend on scheduling order; reductions happen serially afterwards.
inline void parallel_for_indexed(std::size_t n, int workers,
                                 const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 1;
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const int spawn = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  threads.reserve(static_cast<std::size_t>(spawn));
  for (int w = 0; w < spawn; ++w) threads.emplace_back(body);
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

} // namespace flowlab
