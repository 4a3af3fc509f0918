#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace burngail {

// splitmix64 finalizer; used to spread seed material.
uint64_t mix64(uint64_t x);

// Derives an independent stream seed from a root seed, a stream label and up
// to two indices. Every piece of randomness in the project flows from the run
// seed through this function, so results do not depend on worker count or on
// the order in which streams are consumed.
uint64_t derive_seed(uint64_t root, std::string_view label, uint64_t a = 0, uint64_t b = 0);

// Deterministic random stream. The engine is std::mt19937_64 (fully specified
// by the standard); all distribution transforms are implemented here rather
// than with std:: distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(mix64(seed)) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be positive.
  int uniform_int(int n);

  // Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Draws an index from an unnormalized discrete distribution.
  int categorical(std::span<const double> weights);

  // Fisher-Yates shuffle of indices 0..n-1.
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace burngail
