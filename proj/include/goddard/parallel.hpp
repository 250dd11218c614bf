#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace goddard {

/// Concurrency cap for Jacobian-column and labeling evaluations.
/// GODDARD_THREADS overrides; default is machine parallelism.
inline int max_threads() {
  if (const char* env = std::getenv("GODDARD_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(i) for i in [0, n). body must be reentrant. Exceptions from
/// workers are swallowed per-index; callers that care record failure
/// state inside body.
template <class Body>
void parallel_for(int n, Body&& body) {
  const int nthreads = std::min(max_threads(), n);
  if (nthreads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          // bodies record their own failure state
        }
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace goddard
