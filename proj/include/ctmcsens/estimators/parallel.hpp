#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace ctmcsens {

/// Paths per work item. Fixed so that chunk boundaries, and therefore the
/// reduction order, do not depend on the number of workers.
inline constexpr std::size_t kPathsPerChunk = 64;

/// Runs fn(begin, end) over [0, n) in fixed-size chunks on `workers`
/// threads and returns the per-chunk results in chunk order. If any chunk
/// throws, the exception of the lowest failing chunk is rethrown.
template <class Result, class Fn>
std::vector<Result> run_chunks(std::size_t n, std::size_t workers, Fn&& fn,
                               std::size_t chunk = kPathsPerChunk) {
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<Result> results(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    while (true) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        results[c] = fn(c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(chunks, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace ctmcsens
