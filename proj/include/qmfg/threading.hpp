#pragma once

// Deterministic task-parallel map: tasks write into preallocated slots,
// reductions happen afterwards in index order, so results do not depend on
// the worker count.

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace qmfg {

inline unsigned default_thread_count() {
  if (const char* env = std::getenv("QMFG_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

inline void parallel_for(size_t n, unsigned threads,
                         const std::function<void(size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  const unsigned nt = std::min<unsigned>(threads, static_cast<unsigned>(n));
  pool.reserve(nt);
  for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace qmfg
