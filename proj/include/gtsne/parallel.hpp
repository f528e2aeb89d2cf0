#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace gtsne {

//! Worker count: hardware concurrency by default; GTSNE_THREADS, when set
//! to a positive integer, fixes the count instead (values above the core
//! count just oversubscribe, which results never depend on).
inline unsigned thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("GTSNE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
  }
  return hw;
}

//! Runs fn(begin, end) over a static block partition of [0, n).
//! Results must be written to per-index slots so that the outcome is
//! independent of the partition; reductions are then combined serially
//! by the caller in index order, keeping output bit-identical for any
//! worker count.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  unsigned workers = thread_count();
  if (workers <= 1 || n < 2) {
    fn(0, n);
    return;
  }
  workers = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t b = std::min<std::size_t>(w * chunk, n);
    std::size_t e = std::min<std::size_t>(b + chunk, n);
    if (b == e) break;
    pool.emplace_back(fn, b, e);
  }
  for (auto& t : pool) t.join();
}

//! Serial sum of per-index partials, in index order.
inline double ordered_sum(const std::vector<double>& parts) {
  double s = 0.0;
  for (double v : parts) s += v;
  return s;
}

}  // namespace gtsne
