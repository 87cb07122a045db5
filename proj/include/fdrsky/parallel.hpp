#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace fdrsky {

// Process-wide worker cap. 0 means "decide from FDRSKY_THREADS, then
// hardware concurrency". Reductions are always sequential, so numeric
// results never depend on this value.
inline int& thread_cap() {
  static int cap = 0;
  return cap;
}

inline void set_thread_cap(int n) { thread_cap() = n < 0 ? 0 : n; }

inline int effective_threads() {
  int cap = thread_cap();
  if (cap > 0) return cap;
  if (const char* env = std::getenv("FDRSKY_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(row) for row in [0, rows). Rows are partitioned into contiguous
// chunks, one per worker; each row is processed exactly once, so any
// per-row output is identical for every worker count.
inline void parallel_rows(int rows, const std::function<void(int)>& fn) {
  int workers = std::min(effective_threads(), rows);
  if (workers <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  int chunk = (rows + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int begin = w * chunk;
    int end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (int r = begin; r < end; ++r) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fdrsky
