#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace mgr {

/// Counter-based generator "splitmix64-ctr/v1".
///
/// The i-th output (i = 1, 2, ...) for key k is mix64(k + i * 0x9E3779B97F4A7C15)
/// where mix64 is the SplitMix64 finalizer. Doubles take the top 53 bits.
/// Bounded integers use the 128-bit multiply-shift map (x * n) >> 64.
/// The definition is fully specified so streams can be replayed in any
/// language.
class CounterRng {
 public:
  static constexpr std::string_view kName = "splitmix64-ctr/v1";

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform integer on [0, n). n must be positive.
  std::size_t below(std::size_t n);
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

/// Stream key for (master seed, purpose, index). The purpose string is
/// folded with 64-bit FNV-1a before mixing.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t index = 0);

}  // namespace mgr
