#pragma once

#include "levypw/lattice.hpp"
#include "levypw/levy.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace levypw {

struct SimConfig {
  double dt = 0.05;
  long long burn_in = 0; // steps discarded before the first measurement
  long long samples = 1; // measurements kept
  long long thinning = 1; // steps between consecutive measurements
  uint64_t seed = 1;
  double lambda = 0;
  int p = 3;
  double blowup_threshold = 1e12;

  // requires dt * (4 d / delta^2 + m^2) < 1/2 so the Euler heat step contracts
  void validate(const LatticeConfig& lattice) const;
};

// Per-measurement spatial statistics of one explicit Euler run
//   X_{k+1} = X_k + dt (Lap X_k - m^2 X_k - lambda X_k^p) + W_k.
// sample_products[i] is the spatially averaged lagged product
// (1/L^d) sum_y X(y) X(y+x) at measurement i; sample_mean[i] the spatial mean.
struct Trajectory {
  LatticeConfig lattice;
  SimConfig sim;
  std::vector<Field> sample_products;
  std::vector<double> sample_mean;
  std::array<double, 5> increment_power_sum{}; // sum of W^k over cells, k at [k], [0] = count
  long long steps_run = 0;
};

// f is the initial field; empty means zero. Throws NumericError on blow-up.
Trajectory simulate(const LevyParams& params, const SimConfig& sim,
                    const LatticeConfig& lattice, const Field& f = {});

// One noise realization driving one chain per coupling; sim.lambda is ignored.
std::vector<Trajectory> simulate_coupled(const LevyParams& params, const SimConfig& sim,
                                         const LatticeConfig& lattice, const Field& f,
                                         const std::vector<double>& lambdas);

struct CorrelationFunction {
  Field mean; // connected lag field over the full torus
  Field se;   // batch-means standard error, same layout
  int batches = 0;
  int max_lag = 0; // output window, per-axis minimal-image bound
};

// Splits the retained measurements into consecutive batches and estimates
// F(x) = <X(0) X(x)> - <X>^2 per batch; mean and spread over batches.
std::vector<Field> batch_correlations(const Trajectory& traj, int batches);
CorrelationFunction estimate_correlation(const Trajectory& traj, int max_lag,
                                         int batches = 20);

// Stationary law of the linear chain (lambda = 0) driven at cumulant c2:
// modewise variance c2 dt delta^-d / (1 - a_k^2) with a_k = 1 - dt mu^2(k).
Field lambda_zero_stationary_correlation(const Lattice& lat, double c2, double dt);
double lambda_zero_stationary_variance(const Lattice& lat, double c2, double dt);

struct CumulantEstimate {
  double value = 0;
  double se = 0;
};

// Batched k-statistics of raw noise increments, orders 1..4 at [k-1].
// Checks the sampled law against c_k dt delta^{d(1-k)}.
std::vector<CumulantEstimate> estimate_increment_cumulants(const LevyParams& params,
                                                           const LatticeConfig& lattice,
                                                           double dt, long long count,
                                                           int batches, uint64_t seed);

} // namespace levypw
