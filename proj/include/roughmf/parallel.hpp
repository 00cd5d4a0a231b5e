#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace roughmf {

// Process-wide worker count used by parallel_for. Results of every library
// routine are independent of it: work items write to their own slots and all
// reductions run afterwards in index order.
void set_thread_count(int n);
int thread_count();

namespace detail {
bool& in_parallel_region();
}

// Runs body(i) for i in [0, n). Nested calls run serially. If several items
// throw, the exception from the lowest index is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const int threads = thread_count();
  if (threads <= 1 || n < 2 || detail::in_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  auto worker = [&] {
    detail::in_parallel_region() = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
    detail::in_parallel_region() = false;
  };
  const std::size_t count =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::jthread> pool;
  pool.reserve(count - 1);
  for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace roughmf
