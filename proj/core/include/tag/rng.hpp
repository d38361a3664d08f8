#pragma once

#include <cstdint>
#include <string_view>

namespace tag {

// Deterministic PRNG used everywhere randomness is needed. Wraps a
// splitmix64 stream so that draws are reproducible bit-for-bit across
// runs and independent of standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();

  // Uniform integer in [0, n), n > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller; two uniform draws per call, no
  // cached spare, so the stream position is a pure function of the
  // number of calls.
  double normal();

  double uniform_range(double lo, double hi);

 private:
  std::uint64_t state_;
};

// Stable 64-bit stream derivation: mixes a parent seed with a label and
// an index so subsystems draw from disjoint streams.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

}  // namespace tag
