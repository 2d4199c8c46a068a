#pragma once

#include <cstdint>
#include <vector>

#include "maskblur/errors.hpp"

namespace maskblur {

/// Binary on/off mask realisation on a square grid, row-major, bits in {0, 1}.
struct MaskPattern {
  int side = 0;
  std::vector<std::uint8_t> bits;
  int id = 0;

  static MaskPattern all_on(int side, int id = 0) {
    MaskPattern p;
    p.side = side;
    p.bits.assign(static_cast<std::size_t>(side) * side, 1);
    p.id = id;
    return p;
  }

  std::size_t elements() const { return bits.size(); }
  int on_count() const {
    int n = 0;
    for (auto b : bits) n += b;
    return n;
  }
};

enum class PatternScheme { HalfOnExact, Bernoulli, SingleElement };

/// Ordered collection of mask patterns with its generation provenance.
struct PatternSet {
  std::vector<MaskPattern> patterns;
  std::uint64_t seed = 0;
  PatternScheme scheme = PatternScheme::HalfOnExact;

  int count() const { return static_cast<int>(patterns.size()); }
};

inline void validate_pattern(const MaskPattern& p) {
  require(p.side >= 1, ErrorCode::InvalidArgument, "pattern side must be >= 1");
  require(p.bits.size() == static_cast<std::size_t>(p.side) * p.side, ErrorCode::DimensionMismatch,
          "pattern bit count does not match side*side");
  for (auto b : p.bits)
    require(b == 0 || b == 1, ErrorCode::InvalidArgument, "pattern bits must be 0 or 1");
}

}  // namespace maskblur
