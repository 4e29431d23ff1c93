#pragma once

#include <cstdint>
#include <Eigen/Dense>

namespace c3 {

// Deterministic random stream with a fully pinned bit-level specification
// (xoshiro-style splitmix64 core), so experiment outputs are reproducible
// across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Derives an independent stream, e.g. one per trial.
  static Rng ForTrial(uint64_t master_seed, uint64_t trial_index) {
    Rng mix(master_seed ^ (0x9e3779b97f4a7c15ULL * (trial_index + 1)));
    mix.NextU64();
    return mix;
  }

  uint64_t NextU64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double NextCanonical() { return (NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) {
    return lo + (hi - lo) * NextCanonical();
  }

  // Box-Muller; one draw per call (the spare is discarded to keep the
  // stream position a simple function of the call count).
  double Gaussian(double mean = 0.0, double stddev = 1.0) {
    double u1 = NextCanonical();
    double u2 = NextCanonical();
    if (u1 < 1e-300) u1 = 1e-300;
    double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(6.283185307179586 * u2);
  }

  Eigen::VectorXd UniformVector(const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi) {
    Eigen::VectorXd v(lo.size());
    for (int i = 0; i < lo.size(); ++i) v[i] = Uniform(lo[i], hi[i]);
    return v;
  }

  Eigen::VectorXd GaussianVector(int size, double stddev) {
    Eigen::VectorXd v(size);
    for (int i = 0; i < size; ++i) v[i] = Gaussian(0.0, stddev);
    return v;
  }

 private:
  uint64_t state_;
};

}  // namespace c3
