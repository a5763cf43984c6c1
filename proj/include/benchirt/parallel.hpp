#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace benchirt {

/// Calls fn(k) for k in [0, count) on up to `jobs` threads. Each index is
/// handled by exactly one call, so results written to per-index slots do not
/// depend on the worker count.
template <typename Fn>
void parallel_for(int jobs, std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += workers) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace benchirt
