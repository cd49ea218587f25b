#pragma once

// Index-ordered parallel map. Results land in slot i regardless of which
// worker ran them, so reductions over the output are deterministic.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hmc {

/// Worker count: set_thread_count() if called with n > 0, else the
/// HMCHECK_THREADS environment variable, else hardware concurrency.
int thread_count();
void set_thread_count(int n);

template <class R, class F>
std::vector<R> parallel_map(int count, F&& fn) {
  std::vector<R> out(static_cast<std::size_t>(std::max(count, 0)));
  const int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  int first_error_index = count;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        // Keep the lowest-index failure so the reported error is stable.
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace hmc
