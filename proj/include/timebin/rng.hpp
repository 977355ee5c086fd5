#pragma once

#include <cstdint>
#include <random>

namespace timebin {

// Deterministic uniform stream. Every sampler in the library draws through
// this wrapper so that a (seed, draw order) pair fixes the run exactly; the
// distribution helpers below are hand-rolled because the std:: distribution
// objects are implementation-defined and would break byte-identical replay
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  // Independent stream for one block of a partitioned run. Blocks can be
  // processed on any thread in any order and still reproduce the same
  // numbers.
  static Rng for_block(std::uint64_t master_seed, std::uint64_t block_index) {
    return Rng(mix(master_seed) ^ mix(block_index * 0x9e3779b97f4a7c15ull + 1));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal scaled by sigma (Box-Muller, no cached spare).
  double gaussian(double sigma);

 private:
  static std::uint64_t mix(std::uint64_t x);
  std::mt19937_64 gen_;
};

// Decorrelated child seed for one sub-run (scan point, measurement setting)
// of a campaign keyed by a single master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

// Poisson draw by Knuth's product method; exact and cheap for the small
// means used here.
int sample_poisson(double mean, Rng& rng);

// Poisson conditioned on k >= 1, by inverse-CDF walk over the renormalized
// tail.
int sample_poisson_ge1(double mean, Rng& rng);

// Number of consecutive failures before the next success of a Bernoulli(p)
// sequence. Lets a pulse loop jump over stretches where nothing can happen.
std::uint64_t sample_geometric_skips(double p, Rng& rng);

}  // namespace timebin
