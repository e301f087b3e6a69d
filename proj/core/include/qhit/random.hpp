#pragma once

#include <cstdint>

namespace qhit {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Keyed hash of a counter: the whole generator state is (key, counter).
constexpr std::uint64_t hash2(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key ^ mix64(counter + 0x9E3779B97F4A7C15ULL));
}

/// Top 53 bits mapped to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based generator. Copies are independent cursors over the same
/// stream, and substreams are keyed by index, so results never depend on
/// which worker consumed which draws.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  constexpr std::uint64_t next_u64() noexcept { return hash2(key_, counter_++); }
  constexpr double uniform() noexcept { return to_unit(next_u64()); }

  constexpr CounterRng substream(std::uint64_t index) const noexcept {
    return CounterRng(hash2(key_ ^ 0x5851F42D4C957F2DULL, index));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace qhit
