#pragma once

// Counter-based Gaussian noise. Every increment is a pure function of
// (seed, replica, step, site, channel), so trajectories are reproducible
// bit-for-bit regardless of thread count or evaluation order, and a Brownian
// path can be refined in place (bridge midpoints get their own counter line).
//
// std::normal_distribution is implementation-defined; this generator is not.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace qmfg {

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct NoiseKey {
  uint64_t seed = 0;
  uint64_t replica = 0;
  uint64_t step = 0;
  uint64_t site = 0;
  uint64_t channel = 0;
  // Extra lane so one logical key can yield several independent streams
  // (e.g. bridge refinement levels).
  uint64_t stream = 0;
};

inline uint64_t hash_key(const NoiseKey& k) {
  uint64_t h = splitmix64(k.seed ^ 0x51A9B2C3D4E5F607ull);
  h = splitmix64(h ^ k.replica);
  h = splitmix64(h ^ k.step);
  h = splitmix64(h ^ k.site);
  h = splitmix64(h ^ k.channel);
  h = splitmix64(h ^ k.stream);
  return h;
}

inline double uniform_from_bits(uint64_t h) {
  // 53-bit mantissa, strictly inside (0,1].
  return (static_cast<double>(h >> 11) + 1.0) * 0x1p-53;
}

// Standard normal via Box-Muller on two hashed lanes of the key.
inline double gaussian(const NoiseKey& k) {
  const uint64_t h1 = hash_key(k);
  NoiseKey k2 = k;
  k2.stream ^= 0x9E3779B97F4A7C15ull;
  const uint64_t h2 = hash_key(k2);
  const double u1 = uniform_from_bits(h1);
  const double u2 = uniform_from_bits(h2);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Small sequential RNG for test data (tensors, states); same splitmix core.
class SequenceRng {
 public:
  explicit SequenceRng(uint64_t seed) : state_(splitmix64(seed ^ 0xC0FFEEull)) {}
  uint64_t next_bits() { return state_ = splitmix64(state_); }
  double uniform() { return uniform_from_bits(next_bits()); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  int uniform_int(int n) { return static_cast<int>(next_bits() % n); }

 private:
  uint64_t state_;
};

// Pre-materialized Brownian increments for one trajectory:
// increments[(step*sites + site)*channels + channel] ~ N(0, dt).
struct NoisePath {
  int channels = 0;
  int sites = 0;
  double dt = 0.0;
  int steps = 0;
  uint64_t seed = 0;
  uint64_t replica = 0;
  std::vector<double> increments;

  double at(int step, int site, int channel) const {
    return increments[(static_cast<size_t>(step) * sites + site) * channels +
                      channel];
  }
};

inline NoisePath make_noise_path(uint64_t seed, uint64_t replica, int steps,
                                 int sites, int channels, double dt) {
  NoisePath p;
  p.channels = channels;
  p.sites = sites;
  p.dt = dt;
  p.steps = steps;
  p.seed = seed;
  p.replica = replica;
  p.increments.resize(static_cast<size_t>(steps) * sites * channels);
  const double s = std::sqrt(dt);
  size_t idx = 0;
  for (int k = 0; k < steps; ++k)
    for (int j = 0; j < sites; ++j)
      for (int c = 0; c < channels; ++c)
        p.increments[idx++] =
            s * gaussian({seed, replica, static_cast<uint64_t>(k),
                          static_cast<uint64_t>(j), static_cast<uint64_t>(c),
                          0});
  return p;
}

// Brownian-bridge refinement: each increment dY over [t, t+dt] splits into
// dY/2 + xi and dY/2 - xi with xi ~ N(0, dt/4), keyed on its own stream so the
// coarse path is a strict coarsening of the fine one.
inline NoisePath refine_noise_path(const NoisePath& coarse) {
  NoisePath f;
  f.channels = coarse.channels;
  f.sites = coarse.sites;
  f.dt = 0.5 * coarse.dt;
  f.steps = 2 * coarse.steps;
  f.seed = coarse.seed;
  f.replica = coarse.replica;
  f.increments.resize(coarse.increments.size() * 2);
  const double s = std::sqrt(0.25 * coarse.dt);
  for (int k = 0; k < coarse.steps; ++k)
    for (int j = 0; j < coarse.sites; ++j)
      for (int c = 0; c < coarse.channels; ++c) {
        const double dy = coarse.at(k, j, c);
        const double xi =
            s * gaussian({coarse.seed, coarse.replica,
                          static_cast<uint64_t>(k), static_cast<uint64_t>(j),
                          static_cast<uint64_t>(c), 1});
        const size_t a =
            (static_cast<size_t>(2 * k) * f.sites + j) * f.channels + c;
        const size_t b =
            (static_cast<size_t>(2 * k + 1) * f.sites + j) * f.channels + c;
        f.increments[a] = 0.5 * dy + xi;
        f.increments[b] = 0.5 * dy - xi;
      }
  return f;
}

}  // namespace qmfg
