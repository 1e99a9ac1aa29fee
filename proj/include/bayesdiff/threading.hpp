#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace bayesdiff {

// Runs fn(i) for i in [0, n) across up to `threads` std::threads, static
// contiguous split. Tasks must write only to their own slots; determinism
// then holds for any thread count. The first exception (lowest worker index)
// is rethrown after the join barrier.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (threads < 1) threads = 1;
  std::size_t workers = std::min<std::size_t>(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errs(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// Process-wide default worker count used by the engines; the CLI sets it from
// --threads / BAYESDIFF_THREADS. Results never depend on it.
namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> v{0};
  return v;
}
}  // namespace detail

inline int default_threads() {
  int v = detail::thread_setting().load();
  if (v > 0) return v;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

inline void set_default_threads(int n) { detail::thread_setting().store(n); }

}  // namespace bayesdiff
