#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace graphldp {

// Thread cap: explicit setter wins, then GRAPHLDP_THREADS, then hardware.
inline int& thread_cap_storage() {
  static int cap = 0;  // 0 = unresolved
  return cap;
}

inline void set_thread_cap(int t) { thread_cap_storage() = std::max(1, t); }

inline int thread_cap() {
  int& cap = thread_cap_storage();
  if (cap > 0) return cap;
  if (const char* env = std::getenv("GRAPHLDP_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return cap = v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return cap = (hw > 0 ? (int)hw : 1);
}

// Split [0, n) into at most thread_cap() contiguous chunks and run
// fn(begin, end, chunk_index) on each.  The chunk decomposition depends only
// on n and the cap ceiling below, never on the live thread count, so callers
// that accumulate per-chunk results and combine them in chunk order get
// identical answers at any --threads setting.
template <class Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  constexpr std::size_t kChunks = 16;  // fixed decomposition, cap-independent
  std::size_t chunks = std::min<std::size_t>(kChunks, n);
  std::size_t base = n / chunks, rem = n % chunks;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t at = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    std::size_t len = base + (c < rem ? 1 : 0);
    ranges.emplace_back(at, at + len);
    at += len;
  }
  int workers = std::min<int>(thread_cap(), (int)chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(ranges[c].first, ranges[c].second, c);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = (std::size_t)w; c < chunks; c += (std::size_t)workers)
        fn(ranges[c].first, ranges[c].second, c);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace graphldp
