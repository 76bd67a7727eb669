#include "levypw/levy.hpp"

#include <cmath>

namespace levypw {

void LevyParams::validate() const {
  if (sigma2 < 0) throw ConfigError("levy: sigma2 must be >= 0");
  if (z < 0) throw ConfigError("levy: z must be >= 0");
  double w = 0;
  for (const auto& [s, wi] : atoms) {
    if (s == 0) throw ConfigError("levy: jump atom at 0");
    if (wi <= 0) throw ConfigError("levy: atom weight must be positive");
    w += wi;
  }
  if (!atoms.empty() && std::abs(w - 1.0) > 1e-12)
    throw ConfigError("levy: atom weights must sum to 1");
  if (z > 0 && atoms.empty()) throw ConfigError("levy: z > 0 needs a jump law");
}

bool LevyParams::symmetric_jumps() const {
  for (const auto& [s, w] : atoms) {
    double mirror = 0;
    for (const auto& [s2, w2] : atoms)
      if (std::abs(s2 + s) <= 1e-15 * std::max(1.0, std::abs(s))) mirror += w2;
    if (std::abs(mirror - w) > 1e-12) return false;
  }
  return true;
}

double cumulant(int n, const LevyParams& params) {
  if (n < 1) throw ConfigError("cumulant: order must be >= 1");
  params.validate();
  double c = 0;
  if (n == 1) c += params.a;
  if (n == 2) c += params.sigma2;
  if (params.z > 0) {
    double mom = 0;
    for (const auto& [s, w] : params.atoms) mom += w * std::pow(s, n);
    c += params.z * mom;
  }
  return c;
}

CumulantSet cumulants_up_to(int N, const LevyParams& params) {
  CumulantSet cs;
  cs.c.assign(N + 1, 0.0);
  for (int n = 1; n <= N; ++n) cs.c[n] = cumulant(n, params);
  return cs;
}

LevyParams scale_jumps(const LevyParams& params, double factor) {
  if (factor == 0) throw ConfigError("scale_jumps: factor must be nonzero");
  LevyParams out = params;
  for (auto& [s, w] : out.atoms) s *= factor;
  return out;
}

namespace {

inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

CellRng::CellRng(uint64_t seed, uint64_t step, uint64_t site) {
  state_ = mix64(mix64(mix64(seed) ^ step) ^ site);
}

uint64_t CellRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double CellRng::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double CellRng::uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

double CellRng::normal() {
  double u1 = uniform_pos();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

long long CellRng::poisson(double mean) {
  if (mean <= 0) return 0;
  if (mean < 30) {
    double limit = std::exp(-mean);
    long long k = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= uniform_pos();
    }
    return k;
  }
  // normal approximation is adequate far outside the intended small-mean regime
  double g = normal();
  double v = mean + std::sqrt(mean) * g;
  return v < 0 ? 0 : (long long)std::llround(v);
}

NoiseSampler::NoiseSampler(const LevyParams& params, const Lattice& lat, double dt,
                           uint64_t seed)
    : lat_(lat), params_(params), dt_(dt), seed_(seed) {
  params_.validate();
  if (!(dt > 0)) throw ConfigError("noise sampler: dt must be positive");
  const double vol = lat.cell_volume();
  inv_vol_ = 1.0 / vol;
  drift_ = params.a * dt;
  gauss_sd_ = std::sqrt(params.sigma2 * dt * inv_vol_);
  jump_mean_ = params.z * dt * vol;
  double acc = 0;
  for (const auto& [s, w] : params.atoms) {
    acc += w;
    atom_cdf_.push_back(acc);
  }
  if (!atom_cdf_.empty()) atom_cdf_.back() = 1.0;
}

double NoiseSampler::increment(long long step, long long site) const {
  CellRng rng(seed_, (uint64_t)step, (uint64_t)site);
  double w = drift_;
  if (gauss_sd_ > 0) w += gauss_sd_ * rng.normal();
  if (jump_mean_ > 0) {
    long long nj = rng.poisson(jump_mean_);
    for (long long i = 0; i < nj; ++i) {
      double u = rng.uniform();
      size_t idx = 0;
      while (idx + 1 < atom_cdf_.size() && u > atom_cdf_[idx]) ++idx;
      w += params_.atoms[idx].first * inv_vol_;
    }
  }
  return w;
}

void NoiseSampler::fill_step(long long step, Field& out) const {
  out.resize(lat_.sites());
  for (long long i = 0; i < lat_.sites(); ++i) out[i] = increment(step, i);
}

double NoiseSampler::theoretical_cumulant(int k) const {
  return cumulant(k, params_) * dt_ * std::pow(lat_.spacing(), lat_.dim() * (1 - k));
}

NoiseRealization sample_noise_increments(const LevyParams& params, const LatticeConfig& cfg,
                                         double dt, long long steps, uint64_t seed) {
  Lattice lat(cfg);
  NoiseSampler sampler(params, lat, dt, seed);
  NoiseRealization nr;
  nr.dt = dt;
  nr.increments.resize(steps);
  for (long long k = 0; k < steps; ++k) sampler.fill_step(k, nr.increments[k]);
  return nr;
}

} // namespace levypw
