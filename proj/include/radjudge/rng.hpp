#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace radjudge {

/// SplitMix64 mixing step. Used to derive independent stream seeds so that
/// parallel work units stay deterministic regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ (stream + 0x9e3779b97f4a7c15ULL));
}

/// mt19937_64 raw output is fully specified by the standard; all draws below
/// avoid std distributions, whose sequences are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be > 0.
  std::size_t bounded(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates with explicit draws (std::shuffle is implementation-defined).
template <typename T>
void shuffle_in_place(std::vector<T>& items, SeededRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng.bounded(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace radjudge
