#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace kcw {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs chunk_fn(c) for c in [0, n_chunks) on `threads` workers and folds the
/// partial results into `acc` strictly in chunk order, so the result does not
/// depend on scheduling as long as merge(acc, part) is associative.
template <class Partial, class ChunkFn, class MergeFn>
Partial ordered_reduce(std::uint64_t n_chunks, unsigned threads, Partial acc, ChunkFn chunk_fn, MergeFn merge) {
  threads = resolve_threads(threads);
  if (threads == 1 || n_chunks <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) merge(acc, chunk_fn(c));
    return acc;
  }

  std::atomic<std::uint64_t> next{0};
  std::mutex mu;
  std::vector<std::optional<Partial>> pending(n_chunks);
  std::uint64_t merged = 0;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        Partial part = chunk_fn(c);
        std::lock_guard<std::mutex> lock(mu);
        pending[c].emplace(std::move(part));
        while (merged < n_chunks && pending[merged]) {
          merge(acc, std::move(*pending[merged]));
          pending[merged].reset();
          ++merged;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return acc;
}

}  // namespace kcw
