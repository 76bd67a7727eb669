#include "levypw/simulator.hpp"

#include <cmath>
#include <string>

namespace levypw {

void SimConfig::validate(const LatticeConfig& lattice) const {
  lattice.validate();
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (thinning < 1) throw ConfigError("thinning must be >= 1");
  if (p < 1) throw ConfigError("p must be >= 1");
  if (!(blowup_threshold > 0)) throw ConfigError("blowup_threshold must be positive");
  double stiff = 4.0 * lattice.d / (lattice.delta * lattice.delta) + lattice.m * lattice.m;
  if (!(dt * stiff < 0.5))
    throw ConfigError("unstable step: dt * (4 d / delta^2 + m^2) = " +
                      std::to_string(dt * stiff) + " must stay below 0.5");
}

namespace {

double powi(double x, int n) {
  double r = 1;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

struct Chain {
  double lambda;
  Field x;
  Trajectory traj;
};

void check_finite(const Field& x, double cap, long long step) {
  for (double v : x)
    if (!std::isfinite(v) || std::abs(v) > cap)
      throw NumericError("field blow-up at step " + std::to_string(step));
}

void measure(const Lattice& lat, const Field& x, Trajectory& traj) {
  auto xhat = lat.dft(x);
  std::vector<double> power(xhat.size());
  for (size_t k = 0; k < xhat.size(); ++k) power[k] = std::norm(xhat[k]);
  Field prod = lat.idft_real(power);
  double inv = 1.0 / (double)lat.sites();
  for (double& v : prod) v *= inv;
  traj.sample_products.push_back(std::move(prod));
  double mean = 0;
  for (double v : x) mean += v;
  traj.sample_mean.push_back(mean * inv);
}

std::vector<Trajectory> run(const LevyParams& params, const SimConfig& sim,
                            const LatticeConfig& lattice, const Field& f,
                            const std::vector<double>& lambdas) {
  sim.validate(lattice);
  params.validate();
  Lattice lat(lattice);
  if (!f.empty() && (long long)f.size() != lat.sites())
    throw ConfigError("initial field size must match the lattice");

  std::vector<Chain> chains;
  for (double l : lambdas) {
    Chain c;
    c.lambda = l;
    c.x = f.empty() ? Field((size_t)lat.sites(), 0.0) : f;
    c.traj.lattice = lattice;
    c.traj.sim = sim;
    c.traj.sim.lambda = l;
    c.traj.sample_products.reserve((size_t)sim.samples);
    c.traj.sample_mean.reserve((size_t)sim.samples);
    chains.push_back(std::move(c));
  }

  NoiseSampler noise(params, lat, sim.dt, sim.seed);
  double m2 = lattice.m * lattice.m;
  long long total = sim.burn_in + sim.samples * sim.thinning;
  Field w((size_t)lat.sites()), lap((size_t)lat.sites());
  std::array<double, 5> psum{};

  for (long long step = 0; step < total; ++step) {
    noise.fill_step(step, w);
    psum[0] += (double)w.size();
    for (double v : w) {
      double v2 = v * v;
      psum[1] += v;
      psum[2] += v2;
      psum[3] += v2 * v;
      psum[4] += v2 * v2;
    }
    for (auto& c : chains) {
      lat.laplacian(c.x, lap);
      for (size_t i = 0; i < c.x.size(); ++i) {
        double xi = c.x[i];
        c.x[i] = xi + sim.dt * (lap[i] - m2 * xi - c.lambda * powi(xi, sim.p)) + w[i];
      }
      check_finite(c.x, sim.blowup_threshold, step);
      long long k = step + 1 - sim.burn_in;
      if (k > 0 && k % sim.thinning == 0) measure(lat, c.x, c.traj);
    }
  }
  for (auto& c : chains) {
    c.traj.increment_power_sum = psum;
    c.traj.steps_run = total;
  }
  std::vector<Trajectory> out;
  for (auto& c : chains) out.push_back(std::move(c.traj));
  return out;
}

} // namespace

Trajectory simulate(const LevyParams& params, const SimConfig& sim,
                    const LatticeConfig& lattice, const Field& f) {
  return std::move(run(params, sim, lattice, f, {sim.lambda})[0]);
}

std::vector<Trajectory> simulate_coupled(const LevyParams& params, const SimConfig& sim,
                                         const LatticeConfig& lattice, const Field& f,
                                         const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw ConfigError("simulate_coupled needs at least one coupling");
  return run(params, sim, lattice, f, lambdas);
}

std::vector<Field> batch_correlations(const Trajectory& traj, int batches) {
  long long n = (long long)traj.sample_products.size();
  if (batches < 2) throw ConfigError("batching needs at least 2 batches");
  if (n < batches)
    throw ConfigError("too few measurements (" + std::to_string(n) + ") for " +
                      std::to_string(batches) + " batches");
  size_t sites = traj.sample_products[0].size();
  std::vector<Field> out;
  out.reserve((size_t)batches);
  for (int b = 0; b < batches; ++b) {
    long long lo = n * b / batches, hi = n * (b + 1) / batches;
    Field acc(sites, 0.0);
    double mean = 0;
    for (long long i = lo; i < hi; ++i) {
      const Field& a = traj.sample_products[(size_t)i];
      for (size_t s = 0; s < sites; ++s) acc[s] += a[s];
      mean += traj.sample_mean[(size_t)i];
    }
    double inv = 1.0 / (double)(hi - lo);
    mean *= inv;
    for (double& v : acc) v = v * inv - mean * mean;
    out.push_back(std::move(acc));
  }
  return out;
}

CorrelationFunction estimate_correlation(const Trajectory& traj, int max_lag, int batches) {
  if (max_lag < 0) throw ConfigError("max_lag must be >= 0");
  auto per_batch = batch_correlations(traj, batches);
  size_t sites = per_batch[0].size();
  CorrelationFunction cf;
  cf.batches = batches;
  cf.max_lag = max_lag;
  cf.mean.assign(sites, 0.0);
  cf.se.assign(sites, 0.0);
  for (const auto& fb : per_batch)
    for (size_t s = 0; s < sites; ++s) cf.mean[s] += fb[s];
  for (double& v : cf.mean) v /= batches;
  for (const auto& fb : per_batch)
    for (size_t s = 0; s < sites; ++s) {
      double d = fb[s] - cf.mean[s];
      cf.se[s] += d * d;
    }
  double norm = 1.0 / ((double)batches * (batches - 1));
  for (double& v : cf.se) v = std::sqrt(v * norm);
  return cf;
}

Field lambda_zero_stationary_correlation(const Lattice& lat, double c2, double dt) {
  std::vector<double> mode((size_t)lat.sites());
  double amp = c2 * dt / lat.cell_volume();
  for (long long k = 0; k < lat.sites(); ++k) {
    double a = 1.0 - dt * lat.mu2(k);
    double denom = 1.0 - a * a;
    if (!(denom > 0)) throw NumericError("stationary law needs |1 - dt mu^2| < 1");
    mode[(size_t)k] = amp / denom;
  }
  return lat.idft_real(mode);
}

double lambda_zero_stationary_variance(const Lattice& lat, double c2, double dt) {
  return lambda_zero_stationary_correlation(lat, c2, dt)[0];
}

std::vector<CumulantEstimate> estimate_increment_cumulants(const LevyParams& params,
                                                           const LatticeConfig& lattice,
                                                           double dt, long long count,
                                                           int batches, uint64_t seed) {
  params.validate();
  lattice.validate();
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  if (batches < 2) throw ConfigError("batching needs at least 2 batches");
  if (count < 4LL * batches) throw ConfigError("too few increments for the batch count");
  Lattice lat(lattice);
  NoiseSampler noise(params, lat, dt, seed);

  std::vector<std::array<double, 5>> kappa((size_t)batches);
  long long sites = lat.sites();
  for (int b = 0; b < batches; ++b) {
    long long lo = count * b / batches, hi = count * (b + 1) / batches;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (long long i = lo; i < hi; ++i) {
      double w = noise.increment(i / sites, i % sites);
      double w2 = w * w;
      s1 += w;
      s2 += w2;
      s3 += w2 * w;
      s4 += w2 * w2;
    }
    double n = (double)(hi - lo);
    double m = s1 / n;
    double m2 = s2 / n - m * m;
    double m3 = s3 / n - 3 * m * s2 / n + 2 * m * m * m;
    double m4 = s4 / n - 4 * m * s3 / n + 6 * m * m * s2 / n - 3 * m * m * m * m;
    kappa[(size_t)b] = {0, m, m2, m3, m4 - 3 * m2 * m2};
  }

  std::vector<CumulantEstimate> out(4);
  for (int k = 1; k <= 4; ++k) {
    double mean = 0;
    for (const auto& kb : kappa) mean += kb[(size_t)k];
    mean /= batches;
    double var = 0;
    for (const auto& kb : kappa) {
      double d = kb[(size_t)k] - mean;
      var += d * d;
    }
    out[(size_t)(k - 1)] = {mean, std::sqrt(var / ((double)batches * (batches - 1)))};
  }
  return out;
}

} // namespace levypw
