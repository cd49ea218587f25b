#include "hmcheck/parallel.hpp"

#include <string>

namespace hmc {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads.store(n > 0 ? n : 0); }

int thread_count() {
  if (const int n = g_threads.load(); n > 0) return n;
  if (const char* env = std::getenv("HMCHECK_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace hmc
