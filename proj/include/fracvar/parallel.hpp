#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fracvar {

/// Runs body(i) for i in [begin, end). threads == 0 runs inline.
///
/// Work is split into contiguous blocks, and every index is handled by
/// exactly one call, so results written per index do not depend on the
/// thread count. The first exception thrown by any block is rethrown.
template <typename Body>
void parallel_for(std::size_t begin, std::size_t end, unsigned threads, Body&& body) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  if (threads <= 1 || count < 2) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + count * w / workers;
    const std::size_t hi = begin + count * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fracvar
