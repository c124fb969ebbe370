#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace heis {

/// Caps the worker count used by parallel_for (0 restores the hardware default).
void set_max_threads(unsigned count);
unsigned max_threads();

/// Runs body(begin, end) over contiguous chunks of [0, count). Each index is
/// visited exactly once, so results written per index are independent of the
/// thread count.
template <class Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_chunk = 256) {
  const std::size_t workers =
      std::min<std::size_t>(max_threads(), (count + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    if (count > 0) body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace heis
