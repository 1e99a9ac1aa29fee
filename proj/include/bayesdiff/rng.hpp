#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace bayesdiff {

// Counter-based random stream (Philox4x32-10, Salmon et al. 2011) keyed by
// (seed, stream id). The same (seed, stream) always yields the same sequence,
// independent of scheduling or thread count, and distinct stream ids give
// statistically independent streams. Substreams are derived from stable
// 64-bit labels so per-peptide / per-block draws never depend on how work
// was partitioned.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream_id = 0);

  // Child stream with its own independent sequence. Pure: does not advance
  // or otherwise touch this stream.
  RngStream substream(uint64_t label) const;

  uint32_t next_u32();
  uint64_t next_u64();

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform01();

  // Standard normal, Box-Muller (pairs cached).
  double normal();

  // Gamma(shape, scale), Marsaglia-Tsang for shape >= 1, boosted for
  // shape < 1. Valid for any shape > 0.
  double gamma(double shape, double scale);

  double chi2(double df) { return gamma(0.5 * df, 2.0); }

  // Unbiased integer in [0, n), rejection sampled.
  uint64_t uniform_below(uint64_t n);

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_; }

 private:
  void refill();

  uint64_t seed_;
  uint64_t stream_;
  uint64_t block_ = 0;
  uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// SplitMix64 finalizer; used for label mixing and anywhere a cheap 64-bit
// hash of structured ids is needed.
uint64_t mix64(uint64_t x);

// FNV-1a over a byte string; stable labels for peptide/protein ids.
uint64_t fnv1a64(const char* data, std::size_t len);
uint64_t fnv1a64(const std::string& s);

}  // namespace bayesdiff
