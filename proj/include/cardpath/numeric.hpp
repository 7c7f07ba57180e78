#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace cardpath {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Pairwise (cascade) summation of term(0) ... term(n-1). The reduction tree
/// depends only on n, so the result is reproducible bit for bit.
template <class T, class Term>
T pairwise_sum(std::size_t first, std::size_t last, const Term& term) {
  const std::size_t n = last - first;
  if (n <= 8) {
    T acc{};
    for (std::size_t i = first; i < last; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = first + n / 2;
  return pairwise_sum<T>(first, mid, term) + pairwise_sum<T>(mid, last, term);
}

template <class T, class Term>
T pairwise_sum(std::size_t n, const Term& term) {
  return pairwise_sum<T>(std::size_t{0}, n, term);
}

/// Worker count: hardware concurrency capped by CARDPATH_THREADS when set.
std::size_t worker_count();

/// Runs body(begin, end) over contiguous slices of [0, n). Callers must make
/// each index's result independent of the slicing.
template <class Body>
void parallel_for(std::size_t n, const Body& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

/// splitmix64 finalizer applied to (seed, stream): independent, reproducible
/// seeds for sub-streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
inline double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Shortest-safe round-trip decimal ("%.17g").
std::string format_double(double value);

}  // namespace cardpath
