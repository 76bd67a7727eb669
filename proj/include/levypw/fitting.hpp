#pragma once

#include "levypw/lattice.hpp"
#include "levypw/levy.hpp"
#include "levypw/simulator.hpp"

#include <string>
#include <vector>

namespace levypw {

// Least-squares fit of F ~ c2 P1 + lambda c4 P2 over the lag grid.
// Design scalars use the cell-volume weighted inner product delta^d sum_x.
struct FitResult {
  double c2 = 0;
  double c4 = 0;
  double kurtosis = 0; // c4 / c2^2, NaN when c2 <= 0
  double q = 0;        // residual delta^d sum (F - c2 P1 - lambda c4 P2)^2
  double alpha = 0, beta = 0, gamma = 0; // delta^d sums P1^2, lambda^2 P2^2, lambda P1 P2
  double a = 0, b = 0;                   // delta^d sums P1 F, lambda P2 F
  double c = 0;                          // delta^d sum F^2
  double grad_c2 = 0, grad_c4 = 0;       // normal-equation residuals at the minimizer
  bool c2_nonpositive = false;           // model-misfit warning; kurtosis undefined
};

// Closed form c2 = (a beta - gamma b) / (alpha beta - gamma^2),
// c4 = (alpha b - gamma a) / (alpha beta - gamma^2). Throws NumericError when
// the design is degenerate (kernels proportional or vanishing). A nonpositive
// fitted c2 is reported, never clamped.
FitResult fit_first_order(const Field& F_em, const Field& P1, const Field& P2,
                          double lambda, const Lattice& lat);
FitResult fit_first_order(const CorrelationFunction& F_em, const Field& P1,
                          const Field& P2, double lambda, const Lattice& lat);

// |K| <= k_zero -> "diffusive"; below k_jump -> "mixed, predominantly
// diffusive"; otherwise "jump-dominated".
std::string classify_kurtosis(double K, double k_zero = 0.05, double k_jump = 1.0);

// First-order two-point kernels of the explicit Euler chain itself (p = 3),
// with a_k = 1 - dt mu^2(k):
//   P1[k] ~ dt / (1 - a_k^2)
//   P2: melon sum over three internal modes with the step-k propagator
//   PT: tadpole, the equal-time variance closing one vertex pairing
// Fitting simulated data against these removes the O(dt) scheme bias that the
// continuum kernels would leave behind.
struct DiscreteKernels {
  Field P1, P2, PT;
};
DiscreteKernels discretization_matched_kernels(const Lattice& lat, double dt);

// End-to-end identification run: simulate coupled chains at (lambda,
// lambda/8, 0) sharing one noise realization, Richardson-extrapolate the
// correlation to first order in lambda per batch, fit (c2, c4) against
// discretization-matched kernels with the quadratic tadpole term subtracted
// iteratively, and jackknife the batches for standard errors.
struct PipelineConfig {
  LatticeConfig lattice{1, 1.0, 32, 1.0};
  LevyParams noise;
  SimConfig sim; // sim.lambda is the base coupling
  int batches = 25;
  int refit_rounds = 3;
  double k_zero = 0.05;
  double k_jump = 1.0;

  PipelineConfig() {
    sim.dt = 0.05;
    sim.burn_in = 4000;
    sim.samples = 12500;
    sim.thinning = 20;
    sim.lambda = 0.1;
    sim.p = 3;
  }
  void validate() const;
};

struct PipelineResult {
  double c2 = 0, c2_se = 0;
  double c4 = 0, c4_se = 0;
  double kurtosis = 0, kurtosis_se = 0;
  std::string label;
  int batches = 0;
  bool c2_clamped = false; // a tadpole-subtraction round hit c2 < 0
  Field corrected;         // pooled Richardson-extrapolated correlation
  FitResult fit;           // final-round two-kernel fit on the pooled field
};

PipelineResult identify_noise(const PipelineConfig& cfg);

} // namespace levypw
