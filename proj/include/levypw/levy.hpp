#pragma once

#include "levypw/lattice.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace levypw {

// Noise law: drift a, Gaussian variance density sigma2, jump intensity z, and a
// finite-atom jump-size law r. All moments exist by construction.
struct LevyParams {
  double a = 0;
  double sigma2 = 0;
  double z = 0;
  std::vector<std::pair<double, double>> atoms; // (size, weight), weights sum to 1

  void validate() const;
  bool symmetric_jumps() const; // r invariant under s -> -s
};

// c_n = [n==1] a + [n==2] sigma2 + z * sum_i w_i s_i^n
double cumulant(int n, const LevyParams& params);

struct CumulantSet {
  std::vector<double> c; // c[0] unused; c[1..N]
  double operator()(int n) const { return c.at(n); }
  int max_order() const { return (int)c.size() - 1; }
};
CumulantSet cumulants_up_to(int N, const LevyParams& params);

LevyParams scale_jumps(const LevyParams& params, double factor); // s_i -> factor * s_i

// Counter-keyed generator: the stream for one (seed, step, site) cell is a
// fixed function of the key, so increments are reproducible and independent of
// evaluation order. splitmix64 stepping after a triple-mix seed.
class CellRng {
 public:
  CellRng(uint64_t seed, uint64_t step, uint64_t site);
  uint64_t next_u64();
  double uniform();     // [0, 1)
  double uniform_pos(); // (0, 1)
  double normal();
  long long poisson(double mean);

 private:
  uint64_t state_;
};

// Per-(site, step) increment
//   W = a dt + Normal(0, sigma2 dt delta^-d) + delta^-d sum_{i<=N} S_i,
//   N ~ Poisson(z dt delta^d), S_i ~ r,
// so the k-th cumulant of W is c_k dt delta^{d(1-k)}.
class NoiseSampler {
 public:
  NoiseSampler(const LevyParams& params, const Lattice& lat, double dt, uint64_t seed);

  void fill_step(long long step, Field& out) const;
  double increment(long long step, long long site) const;
  double theoretical_cumulant(int k) const; // c_k dt delta^{d(1-k)}

 private:
  const Lattice& lat_;
  LevyParams params_;
  double dt_;
  uint64_t seed_;
  double drift_, gauss_sd_, jump_mean_, inv_vol_;
  std::vector<double> atom_cdf_;
};

// Materialized realization; increment W[k] covers the step from t_k to t_{k+1}.
struct NoiseRealization {
  double dt = 0;
  std::vector<Field> increments;
  long long steps() const { return (long long)increments.size(); }
};

NoiseRealization sample_noise_increments(const LevyParams& params, const LatticeConfig& cfg,
                                         double dt, long long steps, uint64_t seed);

} // namespace levypw
