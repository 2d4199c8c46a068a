#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace maskblur {

/// Counter-based pseudo-random generator (Philox 4x64, 10 rounds).
///
/// Draws are a pure function of (seed, stream, domain, position), so any
/// consumer can be given its own stream and the overall output is independent
/// of evaluation order. Block i is produced from counter
/// {i + 1, carry, stream, domain} with key {seed, 0}; the +1 matches the
/// convention of widely used implementations, so the stream for
/// (seed, stream, domain) can be reproduced elsewhere by running Philox 4x64
/// with a 256-bit counter initialised to (domain << 192) | (stream << 128)
/// and key = seed.
struct Philox4x64 {
  static std::array<std::uint64_t, 4> block(const std::array<std::uint64_t, 4>& counter,
                                            const std::array<std::uint64_t, 2>& key);
};

/// Reserved stream namespaces. Each randomised quantity draws from its own
/// domain so adding draws to one consumer never shifts another.
enum class RngDomain : std::uint64_t {
  MaskPattern = 0,
  MeasurementNoise = 1,
  Calibration = 2,
  General = 3,
  Pattern1D = 4,
};

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, RngDomain domain);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard Gaussian via the Box-Muller transform (two uniforms per pair,
  /// second value cached).
  double normal();

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// First `count` entries of a uniformly random permutation of 0..n-1
  /// (partial Fisher-Yates).
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t count);

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t domain_ = 0;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  int buffer_pos_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace maskblur
