#include "roughmf/parallel.hpp"

#include <algorithm>

namespace roughmf {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) { g_threads.store(std::max(1, n)); }

int thread_count() { return g_threads.load(); }

namespace detail {
bool& in_parallel_region() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

}  // namespace roughmf
