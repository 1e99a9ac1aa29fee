#include "bayesdiff/rng.hpp"

#include <cmath>
#include <numbers>

namespace bayesdiff {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(uint32_t ctr[4], uint32_t k0, uint32_t k1) {
  uint64_t p0 = uint64_t(kPhiloxM0) * ctr[0];
  uint64_t p1 = uint64_t(kPhiloxM1) * ctr[2];
  uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
  uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
  uint32_t n0 = hi1 ^ ctr[1] ^ k0;
  uint32_t n1 = lo1;
  uint32_t n2 = hi0 ^ ctr[3] ^ k1;
  uint32_t n3 = lo0;
  ctr[0] = n0;
  ctr[1] = n1;
  ctr[2] = n2;
  ctr[3] = n3;
}

}  // namespace

uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t fnv1a64(const char* data, std::size_t len) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= uint8_t(data[i]);
    h *= 0x100000001B3ull;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_(stream_id) {}

RngStream RngStream::substream(uint64_t label) const {
  return RngStream(seed_, mix64(stream_ ^ mix64(label)));
}

void RngStream::refill() {
  uint32_t ctr[4] = {uint32_t(block_), uint32_t(block_ >> 32),
                     uint32_t(stream_), uint32_t(stream_ >> 32)};
  uint32_t k0 = uint32_t(seed_);
  uint32_t k1 = uint32_t(seed_ >> 32);
  for (int r = 0; r < 10; ++r) {
    philox_round(ctr, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  out_[0] = ctr[0];
  out_[1] = ctr[1];
  out_[2] = ctr[2];
  out_[3] = ctr[3];
  have_ = 4;
  ++block_;
}

uint32_t RngStream::next_u32() {
  if (have_ == 0) refill();
  return out_[4 - have_--];
}

uint64_t RngStream::next_u64() {
  uint64_t lo = next_u32();
  uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double RngStream::uniform01() {
  // 53-bit mantissa, shifted to the open interval.
  return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

double RngStream::gamma(double shape, double scale) {
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^{1/a}.
    double g = gamma(shape + 1.0, 1.0);
    return scale * g * std::pow(uniform01(), 1.0 / shape);
  }
  // Marsaglia & Tsang (2000).
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform01();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

uint64_t RngStream::uniform_below(uint64_t n) {
  if (n <= 1) return 0;
  uint64_t rem = ~uint64_t(0) % n;
  uint64_t bound = ~uint64_t(0) - rem;  // multiple of n
  for (;;) {
    uint64_t x = next_u64();
    if (x < bound) return x % n;
  }
}

}  // namespace bayesdiff
