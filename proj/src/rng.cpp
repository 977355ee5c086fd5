#include "timebin/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace timebin {

namespace {

std::uint64_t sm64(std::uint64_t x) {
  // splitmix64 finalizer; decorrelates nearby seeds and block indices.
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Rng::mix(std::uint64_t x) { return sm64(x); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return sm64(sm64(seed) + sm64(salt) + 0x632be59bd9b4e019ull);
}

double Rng::gaussian(double sigma) {
  if (sigma < 0.0) throw std::domain_error("gaussian: sigma < 0");
  if (sigma == 0.0) return 0.0;
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

int sample_poisson(double mean, Rng& rng) {
  if (mean < 0.0) throw std::domain_error("sample_poisson: mean < 0");
  if (mean == 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double prod = rng.uniform();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform();
  }
  return k;
}

int sample_poisson_ge1(double mean, Rng& rng) {
  if (mean <= 0.0) throw std::domain_error("sample_poisson_ge1: mean <= 0");
  const double tail = -std::expm1(-mean);  // P(k >= 1)
  double u = rng.uniform() * tail;
  int k = 1;
  double term = std::exp(-mean) * mean;  // P(k = 1)
  double cdf = term;
  while (u >= cdf && k < 200) {
    ++k;
    term *= mean / k;
    cdf += term;
  }
  return k;
}

std::uint64_t sample_geometric_skips(double p, Rng& rng) {
  if (p <= 0.0 || p > 1.0) throw std::domain_error("sample_geometric_skips: p out of (0, 1]");
  if (p == 1.0) return 0;
  double u = rng.uniform();
  while (u <= 0.0) u = rng.uniform();
  const double skips = std::log(u) / std::log1p(-p);
  const double cap = 9.0e18;  // stay castable to uint64 for vanishing p
  return static_cast<std::uint64_t>(skips < cap ? skips : cap);
}

}  // namespace timebin
