#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace gp {

/// 64-bit FNV-1a; stable across platforms, used for seed derivation and config hashes.
std::uint64_t hash_bytes(std::string_view bytes);

/// Mixes a base seed with a stream tag (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

/// Seeded random source. The engine is std::mt19937_64 (fully specified by the
/// standard); the distributions are implemented here because the standard
/// library's are implementation-defined, and reports must be reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  /// Standard normal via Box-Muller (one draw per call, no caching).
  double normal();

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);
  /// Uniformly random permutation with no fixed points (n >= 2), by rejection.
  std::vector<std::size_t> derangement(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gp
