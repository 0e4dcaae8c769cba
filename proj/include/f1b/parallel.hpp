#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace f1b {

// Work is split into fixed-size blocks that do not depend on the worker
// count. Fixed blocks plus per-block result slots merged in index order keep
// every reduction (including floating-point ones) bit-identical for any
// number of workers.
inline constexpr std::int64_t kParallelBlock = 1024;

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline std::int64_t block_count(std::int64_t total, std::int64_t block_size = kParallelBlock) {
  return (total + block_size - 1) / block_size;
}

// Runs fn(block_index, begin, end) over [0, total) partitioned into blocks of
// `block_size`. Blocks are claimed from a shared counter, so scheduling varies
// with the worker count but the per-block computations do not.
template <typename Fn>
void for_each_block(std::int64_t total, int workers, Fn&& fn,
                    std::int64_t block_size = kParallelBlock) {
  if (total <= 0) return;
  const std::int64_t blocks = block_count(total, block_size);
  workers = static_cast<int>(std::min<std::int64_t>(std::max(workers, 1), blocks));

  auto run_block = [&](std::int64_t b) {
    fn(b, b * block_size, std::min(total, (b + 1) * block_size));
  };

  if (workers == 1) {
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= blocks || failed.load(std::memory_order_relaxed)) return;
      try {
        run_block(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace f1b
