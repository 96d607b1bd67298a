#pragma once

#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace arpatch {

// Bad input from the caller/user (missing files, malformed configs, shape
// mismatches at the API boundary). The CLI maps this to exit code 2;
// everything else that escapes maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parallelism cap: ARPATCH_THREADS env var, falling back to the hardware
// count. A value of 1 disables worker threads entirely.
inline int thread_cap() {
  if (const char* env = std::getenv("ARPATCH_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static-partition parallel loop. Each index must write only its own output
// slot, so results are identical for any thread count. Exceptions from
// workers are rethrown on the calling thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         int max_threads = 0) {
  int cap = max_threads > 0 ? max_threads : thread_cap();
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cap), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace arpatch
