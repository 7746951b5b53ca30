#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace netbench {

/// SplitMix64 finalizer. A bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Per-query seed: mix64(master + 0x9E3779B97F4A7C15 * (index + 1)).
/// Injective in `index` for a fixed master, so query seeds within a batch
/// never collide, and any index can be generated without its predecessors.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Deterministic random source. mt19937_64's output sequence is fixed by the
/// standard; the bounded draws below avoid the implementation-defined
/// std::uniform_int_distribution so streams match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  template <typename T>
  const T& pick(std::span<const T> items) {
    return items[below(items.size())];
  }

  template <typename Container>
  const auto& pick(const Container& items) {
    return items[below(items.size())];
  }

  /// Derives an independent child stream.
  Rng fork() { return Rng(mix64(next())); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netbench
