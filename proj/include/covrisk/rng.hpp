#pragma once

#include <cmath>
#include <cstdint>

#include "covrisk/errors.hpp"

namespace covrisk {

namespace detail {

struct PhiloxOutput {
  std::uint32_t x[4];
};

// Philox 4x32, 10 rounds. Counter-based: the output is a pure function of
// (counter, key), so any block of any stream can be generated independently.
inline PhiloxOutput philox4x32_10(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                                  std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
  constexpr std::uint64_t kMul0 = 0xD2511F53u;
  constexpr std::uint64_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t prod0 = kMul0 * c0;
    const std::uint64_t prod1 = kMul1 * c2;
    const std::uint32_t n0 = static_cast<std::uint32_t>(prod1 >> 32) ^ c1 ^ k0;
    const std::uint32_t n1 = static_cast<std::uint32_t>(prod1);
    const std::uint32_t n2 = static_cast<std::uint32_t>(prod0 >> 32) ^ c3 ^ k1;
    const std::uint32_t n3 = static_cast<std::uint32_t>(prod0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return PhiloxOutput{{c0, c1, c2, c3}};
}

}  // namespace detail

// Seeded, counter-based random stream. The 128-bit Philox counter packs a
// 64-bit block index with the 64-bit stream id and the key is the seed, so
// identical (seed, stream_id) replay identical sequences on any platform and
// distinct stream ids are independent by construction.
//
// Stream-space convention: an operation handed an RngStream owns the band
// [stream_id, stream_id + 2^32); sharded Monte Carlo uses substream(1 + i)
// for shard i. Callers spacing logical uses 2^32 apart never collide.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  // Fresh stream at stream_id + offset (position zero, no cached draws).
  RngStream substream(std::uint64_t offset) const { return RngStream(seed_, stream_ + offset); }

  std::uint64_t next_u64() {
    if (buffer_pos_ == 2) {
      const detail::PhiloxOutput out = detail::philox4x32_10(
          static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
          static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32));
      buffer_[0] = out.x[0] | (static_cast<std::uint64_t>(out.x[1]) << 32);
      buffer_[1] = out.x[2] | (static_cast<std::uint64_t>(out.x[3]) << 32);
      buffer_pos_ = 0;
      ++block_;
    }
    return buffer_[buffer_pos_++];
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); safe under log().
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Marsaglia's polar method; the second variate of each
  // accepted pair is cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t buffer_[2] = {0, 0};
  int buffer_pos_ = 2;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline double sample_std_normal(RngStream& rng) { return rng.next_normal(); }

namespace detail {

// Gamma(shape, 1). Marsaglia-Tsang squeeze for shape >= 1; for shape < 1 the
// boosted draw Gamma(shape + 1) * U^(1/shape) is exact.
inline double sample_gamma(RngStream& rng, double shape) {
  if (shape < 1.0) {
    const double u = rng.next_double_open();
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace detail

inline double sample_chisq(RngStream& rng, double dof) {
  if (!(dof > 0.0)) throw DomainError("sample_chisq: dof must be positive");
  return 2.0 * detail::sample_gamma(rng, 0.5 * dof);
}

}  // namespace covrisk
