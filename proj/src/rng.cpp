#include "maskblur/rng.hpp"

#include <cmath>
#include <numbers>

#include "maskblur/errors.hpp"

namespace maskblur {

namespace {
constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;
}  // namespace

std::array<std::uint64_t, 4> Philox4x64::block(const std::array<std::uint64_t, 4>& counter,
                                               const std::array<std::uint64_t, 2>& key) {
  std::array<std::uint64_t, 4> c = counter;
  std::array<std::uint64_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 p0 = static_cast<unsigned __int128>(kMult0) * c[0];
    const unsigned __int128 p1 = static_cast<unsigned __int128>(kMult1) * c[2];
    const std::array<std::uint64_t, 4> next = {
        static_cast<std::uint64_t>(p1 >> 64) ^ c[1] ^ k[0],
        static_cast<std::uint64_t>(p1),
        static_cast<std::uint64_t>(p0 >> 64) ^ c[3] ^ k[1],
        static_cast<std::uint64_t>(p0),
    };
    c = next;
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, RngDomain domain)
    : key_{seed, 0}, stream_(stream), domain_(static_cast<std::uint64_t>(domain)) {}

void CounterRng::refill() {
  // Counter word 0 starts at 1 and carries into word 1 on wrap, mirroring a
  // 256-bit counter that was pre-incremented once.
  const std::uint64_t c0 = block_index_ + 1;
  const std::uint64_t c1 = (c0 == 0) ? 1 : 0;
  buffer_ = Philox4x64::block({c0, c1, stream_, domain_}, key_);
  ++block_index_;
  buffer_pos_ = 0;
}

std::uint64_t CounterRng::next_u64() {
  if (buffer_pos_ >= 4) refill();
  return buffer_[buffer_pos_++];
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log1p(-u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
  require(bound > 0, ErrorCode::InvalidArgument, "bound must be positive");
  // Reject the partial cycle at the top of the 64-bit range so the modulo is
  // exactly uniform.
  const std::uint64_t threshold = (-bound) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % bound;
  }
}

std::vector<std::uint32_t> CounterRng::sample_without_replacement(std::uint32_t n,
                                                                  std::uint32_t count) {
  require(count <= n, ErrorCode::InvalidArgument, "cannot sample more items than available");
  std::vector<std::uint32_t> pool(n);
  for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t j = i + below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace maskblur
