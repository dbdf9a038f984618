#pragma once

#include <cstdint>
#include <random>

namespace satevo {

/// Deterministic random stream used for instance generation and the
/// evolution search. The engine is std::mt19937_64 (fully specified by the
/// standard), and bounded draws use Lemire's multiply-shift reduction with
/// rejection instead of std::uniform_int_distribution, whose output differs
/// between standard library implementations. Identical seeds therefore give
/// identical streams on every platform.
class RandomStream {
 public:
  /// Algorithm identifier recorded in trace headers and run manifests.
  static constexpr const char* kAlgorithmId = "mt19937_64/lemire";

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw from [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire 2019, exact-uniform via rejection of the biased low range.
    unsigned __int128 product =
        static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0ULL - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  /// Fair coin.
  bool next_bool() { return (next_u64() >> 63) != 0; }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace satevo
