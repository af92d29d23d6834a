#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

// Deterministic work partitioning. Jobs are split into fixed-size chunks
// whose boundaries depend only on (n_items, chunk_size), never on the worker
// count. Workers race for chunk indices, but every chunk result lands in a
// slot keyed by its index and reduction happens in ascending-index order on
// the calling thread, so the merged result is bitwise identical for any
// number of workers.

namespace remsim {

inline std::size_t chunk_count(std::size_t n_items, std::size_t chunk_size) {
  return n_items == 0 ? 0 : (n_items + chunk_size - 1) / chunk_size;
}

// fn(chunk_index, first_item, last_item) -> R, ranges half-open over items
template <typename R, typename Fn>
std::vector<R> chunked_map(std::size_t n_items, std::size_t chunk_size, int n_workers,
                           Fn&& fn) {
  const std::size_t n_chunks = chunk_count(n_items, chunk_size);
  std::vector<R> results(n_chunks);
  if (n_chunks == 0) return results;
  if (n_workers < 1) n_workers = static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  if (static_cast<std::size_t>(n_workers) > n_chunks)
    n_workers = static_cast<int>(n_chunks);
  if (n_workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t first = c * chunk_size;
      const std::size_t last = std::min(n_items, first + chunk_size);
      results[c] = fn(c, first, last);
    }
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::size_t first = c * chunk_size;
      const std::size_t last = std::min(n_items, first + chunk_size);
      results[c] = fn(c, first, last);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace remsim
