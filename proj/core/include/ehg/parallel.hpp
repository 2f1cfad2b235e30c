#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace ehg {

/// Thread budget from EHG_THREADS; 1 when unset or invalid.
inline std::size_t thread_budget() {
  const char* env = std::getenv("EHG_THREADS");
  if (!env) return 1;
  const long n = std::strtol(env, nullptr, 10);
  return n > 0 ? static_cast<std::size_t>(n) : 1;
}

/// Runs fn(i) for i in [0, n) on up to thread_budget() threads. The first
/// exception thrown by any call is rethrown after all threads join.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const std::size_t threads = std::min(thread_budget(), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ehg
