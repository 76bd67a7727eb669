#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "levypw/simulator.hpp"

#include <cmath>

using namespace levypw;

namespace {

LevyParams gaussian(double sigma2) {
  LevyParams p;
  p.sigma2 = sigma2;
  return p;
}

} // namespace

TEST_CASE("configuration validation enforces the stability bound") {
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  SimConfig sim;
  sim.dt = 0.05;
  CHECK_NOTHROW(sim.validate(lattice));
  sim.dt = 0.2; // 0.2 * (4 + 1) = 1.0
  CHECK_THROWS_AS(sim.validate(lattice), ConfigError);
  sim.dt = 0.05;
  sim.samples = 0;
  CHECK_THROWS_AS(sim.validate(lattice), ConfigError);
  sim.samples = 1;
  sim.thinning = 0;
  CHECK_THROWS_AS(sim.validate(lattice), ConfigError);
}

TEST_CASE("runs are reproducible by seed") {
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  SimConfig sim;
  sim.dt = 0.05;
  sim.burn_in = 10;
  sim.samples = 20;
  sim.thinning = 2;
  sim.seed = 5;
  auto a = simulate(gaussian(1.0), sim, lattice);
  auto b = simulate(gaussian(1.0), sim, lattice);
  CHECK(a.sample_mean == b.sample_mean);
  CHECK(a.sample_products == b.sample_products);
  sim.seed = 6;
  auto c = simulate(gaussian(1.0), sim, lattice);
  CHECK(a.sample_mean != c.sample_mean);
}

TEST_CASE("noise-free linear decay follows the Euler factor exactly") {
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  SimConfig sim;
  sim.dt = 0.05;
  sim.burn_in = 0;
  sim.samples = 6;
  sim.thinning = 1;
  Field f((size_t)8, 1.0);
  auto traj = simulate(LevyParams{}, sim, lattice, f);
  double factor = 1.0 - sim.dt * lattice.m * lattice.m;
  for (int i = 0; i < 6; ++i)
    CHECK(traj.sample_mean[(size_t)i] ==
          doctest::Approx(std::pow(factor, i + 1)).epsilon(1e-13));
}

TEST_CASE("constant data has identically zero connected correlation") {
  // measurements held at a constant field of 0.5: the lagged products are all
  // exactly 0.25 and the dyadic values make the subtraction bitwise zero
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  Trajectory traj;
  traj.lattice = lattice;
  traj.sim.samples = 40;
  for (int i = 0; i < 40; ++i) {
    traj.sample_products.push_back(Field((size_t)8, 0.25));
    traj.sample_mean.push_back(0.5);
  }
  auto cf = estimate_correlation(traj, 4, 4);
  for (double v : cf.mean) CHECK(v == 0.0);
  for (double v : cf.se) CHECK(v == 0.0);
}

TEST_CASE("linear chain reaches the discrete stationary law") {
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  Lattice lat(lattice);
  SimConfig sim;
  sim.dt = 0.05;
  sim.burn_in = 2000;
  sim.samples = 4000;
  sim.thinning = 5;
  sim.seed = 12;
  auto traj = simulate(gaussian(1.0), sim, lattice);
  auto cf = estimate_correlation(traj, 4, 25);

  Field want = lambda_zero_stationary_correlation(lat, 1.0, sim.dt);
  double var = lambda_zero_stationary_variance(lat, 1.0, sim.dt);
  CHECK(want[0] == doctest::Approx(var));
  CHECK(std::abs(cf.mean[0] - var) < 4 * cf.se[0]);
  for (size_t x = 0; x < want.size(); ++x)
    CHECK(std::abs(cf.mean[x] - want[x]) < 4 * cf.se[x] + 1e-4 * var);
}

TEST_CASE("estimated correlations are symmetric under lag negation") {
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  Lattice lat(lattice);
  SimConfig sim;
  sim.dt = 0.05;
  sim.burn_in = 500;
  sim.samples = 500;
  sim.thinning = 2;
  sim.lambda = 0.2;
  auto traj = simulate(gaussian(1.0), sim, lattice);
  auto cf = estimate_correlation(traj, 4, 10);
  for (long long x = 0; x < lat.sites(); ++x) {
    long long neg = lat.mode_neg(x); // site negation shares the mode table
    CHECK(std::abs(cf.mean[(size_t)x] - cf.mean[(size_t)neg]) < 1e-12);
    CHECK(std::abs(cf.se[(size_t)x] - cf.se[(size_t)neg]) < 1e-12);
  }
}

TEST_CASE("batching rejects bad shapes") {
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  SimConfig sim;
  sim.dt = 0.05;
  sim.samples = 10;
  auto traj = simulate(gaussian(1.0), sim, lattice);
  CHECK_THROWS_AS(estimate_correlation(traj, 4, 11), ConfigError);
  CHECK_THROWS_AS(estimate_correlation(traj, 4, 1), ConfigError);
  CHECK_THROWS_AS(estimate_correlation(traj, -1, 5), ConfigError);
}

TEST_CASE("unstable drift blows up and is reported") {
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  SimConfig sim;
  sim.dt = 0.05;
  sim.samples = 200;
  sim.thinning = 1;
  sim.lambda = 1.0;
  sim.p = 4; // even power, unbounded below on the negative side
  Field f((size_t)8, 50.0);
  CHECK_THROWS_AS(simulate(LevyParams{}, sim, lattice, f), NumericError);
}

TEST_CASE("coupled chains share one noise realization") {
  LatticeConfig lattice{1, 1.0, 8, 1.0};
  SimConfig sim;
  sim.dt = 0.05;
  sim.burn_in = 50;
  sim.samples = 30;
  sim.thinning = 2;
  sim.seed = 9;
  auto chains = simulate_coupled(gaussian(1.0), sim, lattice, {}, {0.3, 0.0, 0.0});
  CHECK(chains.size() == 3);
  CHECK(chains[1].sample_products == chains[2].sample_products);
  CHECK(chains[0].sample_products != chains[1].sample_products);
  CHECK(chains[0].sim.lambda == 0.3);

  sim.lambda = 0.0;
  auto alone = simulate(gaussian(1.0), sim, lattice);
  CHECK(alone.sample_products == chains[1].sample_products);
}

TEST_CASE("increment cumulant estimates track the law") {
  LatticeConfig lattice{1, 0.5, 8, 1.0};
  double dt = 0.1;

  auto est = estimate_increment_cumulants(gaussian(2.0), lattice, dt, 200000, 20, 3);
  double k2 = 2.0 * dt / 0.5;
  CHECK(est[1].se > 0);
  CHECK(std::abs(est[1].value - k2) < 5 * est[1].se);
  CHECK(std::abs(est[3].value) < 5 * est[3].se);

  LevyParams rad;
  rad.z = 1.0;
  rad.atoms = {{1.0, 0.5}, {-1.0, 0.5}};
  auto jest = estimate_increment_cumulants(rad, lattice, dt, 200000, 20, 4);
  double k4 = 1.0 * dt * std::pow(0.5, -3.0);
  CHECK(std::abs(jest[3].value - k4) < 5 * jest[3].se);
  CHECK(std::abs(jest[0].value) < 5 * jest[0].se + 1e-12);
}
