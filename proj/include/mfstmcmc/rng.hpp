#pragma once
// Counter-based random streams (Philox4x32-10). Each logical consumer (a
// chain at a given tempering level, a prior draw, one SSA cell) owns a stream
// keyed by (master seed, purpose, id pair), so the draw sequence is fixed by
// the configuration and independent of thread scheduling or worker count.

#include <cmath>
#include <cstdint>

namespace mfst {

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

enum class StreamPurpose : uint32_t {
  PriorDraw = 1,
  Resample = 2,
  Chain = 3,
  SsaCell = 4,
  Scratch = 99,
};

class RngStream {
 public:
  RngStream() : RngStream(0x853c49e6748fea9bull) {}

  explicit RngStream(uint64_t key) {
    key_[0] = static_cast<uint32_t>(key);
    key_[1] = static_cast<uint32_t>(key >> 32);
    ctr_[0] = ctr_[1] = ctr_[2] = ctr_[3] = 0;
    have_ = 0;
  }

  static RngStream derive(uint64_t master_seed, StreamPurpose purpose,
                          uint64_t a = 0, uint64_t b = 0) {
    uint64_t k = detail::splitmix64(master_seed);
    k = detail::splitmix64(k ^ static_cast<uint64_t>(purpose));
    k = detail::splitmix64(k ^ a);
    k = detail::splitmix64(k ^ b);
    return RngStream(k);
  }

  uint32_t next_u32() {
    if (have_ == 0) refill();
    return out_[--have_];
  }

  uint64_t next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // uniform on [0,1) with 53 random bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1], safe to pass through log()
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller; consumes exactly two uniforms per call (no cached spare, so
  // the draw count per proposal is predictable).
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

 private:
  static void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
  }

  void refill() {
    uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
    uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, c0, hi0, lo0);
      mulhilo(0xCD9E8D57u, c2, hi1, lo1);
      uint32_t n0 = hi1 ^ c1 ^ k0;
      uint32_t n1 = lo1;
      uint32_t n2 = hi0 ^ c3 ^ k1;
      uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c3; out_[1] = c2; out_[2] = c1; out_[3] = c0;
    have_ = 4;
    // 128-bit counter increment
    if (++ctr_[0] == 0 && ++ctr_[1] == 0 && ++ctr_[2] == 0) ++ctr_[3];
  }

  uint32_t key_[2];
  uint32_t ctr_[4];
  uint32_t out_[4];
  int have_;
};

}  // namespace mfst
