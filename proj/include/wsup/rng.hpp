#pragma once

// Deterministic per-task random streams. Stream i of master seed s is seeded from
// splitmix64(s ^ splitmix64(i + golden)); the result of any Monte Carlo loop therefore
// depends only on (s, i), never on how tasks are assigned to workers.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <random>
#include <thread>
#include <vector>

namespace wsup {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine make_stream(std::uint64_t master, std::uint64_t index) { return Engine{stream_seed(master, index)}; }

/// Uniform on the open interval (0, 1).
inline double open_uniform(Engine& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Runs body(i) for i in [0, n) on `threads` workers with static contiguous blocks.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      pool.emplace_back([begin, end, &body, &failure = failures[w]] {
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          failure = std::current_exception();
        }
      });
    }
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
}

}  // namespace wsup
