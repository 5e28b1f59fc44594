#pragma once

#include <cmath>
#include <cstdint>

namespace mmg {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
// A stream is (seed, stream id); draws are a pure function of the counter,
// so independent streams can be consumed from any thread in any order and
// still reproduce bit-identically.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32) ^ 0x85EBCA6Bu),
        ctr_hi_(stream),
        ctr_lo_(0),
        buf_pos_(4) {}

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) {
      block(ctr_lo_, ctr_hi_, buf_);
      ++ctr_lo_;
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one value per pair of uniforms is
  // discarded so that draw counts stay position-independent.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
  }

  void block(std::uint64_t lo, std::uint64_t hi, std::uint32_t out[4]) const {
    std::uint32_t c0 = static_cast<std::uint32_t>(lo);
    std::uint32_t c1 = static_cast<std::uint32_t>(lo >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(hi);
    std::uint32_t c3 = static_cast<std::uint32_t>(hi >> 32);
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
      std::uint32_t hi0 = mulhi(m0, c0), lo0 = m0 * c0;
      std::uint32_t hi1 = mulhi(m1, c2), lo1 = m1 * c2;
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out[0] = c0; out[1] = c1; out[2] = c2; out[3] = c3;
  }

  std::uint32_t key0_, key1_;
  std::uint64_t ctr_hi_, ctr_lo_;
  std::uint32_t buf_[4];
  int buf_pos_;
};

// Mixes a substream label into a stream id; used for per-point/per-task
// streams derived from one user seed.
inline std::uint64_t substream(std::uint64_t base, std::uint64_t idx) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (idx + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace mmg
