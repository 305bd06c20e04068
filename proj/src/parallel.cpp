#include "fgplan/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <thread>
#include <vector>

namespace fgplan {

namespace {

constexpr std::size_t kMinParallelWork = std::size_t{1} << 16;

}  // namespace

std::size_t max_threads() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FGPLAN_THREADS")) {
    std::size_t requested = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), requested);
    if (ec == std::errc() && requested > 0) cap = std::min(cap, requested);
  }
  return cap;
}

void for_each_row(std::size_t n, std::size_t work_per_row,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min(max_threads(), n);
  if (threads <= 1 || n * std::max<std::size_t>(work_per_row, 1) < kMinParallelWork) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace fgplan
