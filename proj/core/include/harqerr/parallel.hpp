#pragma once

// Seeded, partition-independent Monte Carlo plumbing.
//
// Every Monte Carlo routine in the library splits its work into fixed-size
// blocks (or single trials) whose random streams are derived from the master
// seed and the block index alone. Workers pull blocks from a shared counter
// and the caller merges per-block results in index order, so aggregate counts
// and sums are bit-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <type_traits>
#include <vector>

namespace harqerr {

using Engine = std::mt19937_64;

/// Default master seed used when callers do not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20160415ULL;

/// Engine for stream `stream` of master seed `seed`. Streams with different
/// indices are statistically independent for practical purposes.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x68617271u};
  return Engine(seq);
}

/// A 64-bit seed derived from (seed, stream); used to hand sub-seeds to
/// nested Monte Carlo routines.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Engine e = make_engine(seed, stream);
  return e();
}

/// Resolves a requested worker count; 0 means one per hardware thread.
inline unsigned resolve_workers(unsigned workers, std::size_t jobs) {
  unsigned n = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs fn(i) for i in [0, jobs) on `workers` threads and returns the results
/// in index order. The first exception thrown by any job is rethrown.
/// The result type must not be bool (std::vector<bool> is not thread-safe).
template <class Fn>
auto run_indexed(std::size_t jobs, unsigned workers, Fn fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<R> results(jobs);
  const unsigned n = resolve_workers(workers, jobs);
  if (n <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) results[i] = fn(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = jobs;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

/// Monte Carlo estimate of a probability or mean.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

}  // namespace harqerr
