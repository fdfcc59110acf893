#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <span>

namespace sepeff {

/// Thread count used by every OpenMP kernel in the library. Values < 1 reset
/// to the OpenMP default. Output values never depend on this setting.
void set_num_threads(int n);
int num_threads();

/// Order-fixed pairwise summation; the result depends only on the input
/// sequence, never on how the terms were produced.
double pairwise_sum(std::span<const double> xs);

/// Mixes (seed, stream) into an independent 64-bit seed (splitmix64 finalizer
/// applied twice). Replicate r of a seeded computation always gets
/// derive_seed(seed, r), whatever thread runs it.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
  return Engine(derive_seed(seed, stream));
}

/// Runs body(i) for i in [0, n) on the library thread pool. The first
/// exception thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr first;
  std::mutex guard;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(num_threads())
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace sepeff
