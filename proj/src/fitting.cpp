#include "levypw/fitting.hpp"

#include <cmath>
#include <limits>

namespace levypw {

namespace {

double dot(const Lattice& lat, const Field& u, const Field& v) {
  double s = 0;
  for (size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * lat.cell_volume();
}

} // namespace

FitResult fit_first_order(const Field& F_em, const Field& P1, const Field& P2,
                          double lambda, const Lattice& lat) {
  size_t S = (size_t)lat.sites();
  if (F_em.size() != S || P1.size() != S || P2.size() != S)
    throw ConfigError("fit inputs must share the lattice lag grid");

  FitResult r;
  r.alpha = dot(lat, P1, P1);
  r.beta = lambda * lambda * dot(lat, P2, P2);
  r.gamma = lambda * dot(lat, P1, P2);
  r.a = dot(lat, P1, F_em);
  r.b = lambda * dot(lat, P2, F_em);
  r.c = dot(lat, F_em, F_em);

  double det = r.alpha * r.beta - r.gamma * r.gamma;
  if (!(det > 1e-12 * r.alpha * r.beta) || !(r.alpha > 0) || !(r.beta > 0))
    throw NumericError("degenerate design: kernels proportional or vanishing");

  r.c2 = (r.a * r.beta - r.gamma * r.b) / det;
  r.c4 = (r.alpha * r.b - r.gamma * r.a) / det;
  r.grad_c2 = r.alpha * r.c2 + r.gamma * r.c4 - r.a;
  r.grad_c4 = r.gamma * r.c2 + r.beta * r.c4 - r.b;

  double q = 0;
  for (size_t i = 0; i < S; ++i) {
    double res = F_em[i] - r.c2 * P1[i] - lambda * r.c4 * P2[i];
    q += res * res;
  }
  r.q = q * lat.cell_volume();

  if (r.c2 > 0) {
    r.kurtosis = r.c4 / (r.c2 * r.c2);
  } else {
    r.c2_nonpositive = true;
    r.kurtosis = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

FitResult fit_first_order(const CorrelationFunction& F_em, const Field& P1,
                          const Field& P2, double lambda, const Lattice& lat) {
  return fit_first_order(F_em.mean, P1, P2, lambda, lat);
}

std::string classify_kurtosis(double K, double k_zero, double k_jump) {
  if (!(k_zero >= 0) || !(k_jump > k_zero))
    throw ConfigError("thresholds need 0 <= k_zero < k_jump");
  double m = std::abs(K);
  if (m <= k_zero) return "diffusive";
  if (m < k_jump) return "mixed, predominantly diffusive";
  return "jump-dominated";
}

DiscreteKernels discretization_matched_kernels(const Lattice& lat, double dt) {
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  long long S = lat.sites();
  double vol = lat.cell_volume();
  std::vector<double> av((size_t)S), g2((size_t)S);
  for (long long k = 0; k < S; ++k) {
    double a = 1.0 - dt * lat.mu2(k);
    double denom = 1.0 - a * a;
    if (!(denom > 0)) throw NumericError("kernels need |1 - dt mu^2| < 1");
    av[(size_t)k] = a;
    g2[(size_t)k] = 1.0 / denom;
  }

  DiscreteKernels out;
  std::vector<double> mode((size_t)S);

  for (long long k = 0; k < S; ++k) mode[(size_t)k] = dt / vol * g2[(size_t)k];
  out.P1 = lat.idft_real(mode);

  // melon: three internal modes threaded between the two vertices
  double c_p2 = -2.0 * dt * dt / (vol * vol * vol) / ((double)S * (double)S);
  for (long long q = 0; q < S; ++q) {
    double inner = 0;
    for (long long q1 = 0; q1 < S; ++q1) {
      double a1 = av[(size_t)q1];
      for (long long q2 = 0; q2 < S; ++q2) {
        long long q3 = lat.mode_add(q, lat.mode_neg(lat.mode_add(q1, q2)));
        inner += 1.0 / (1.0 - av[(size_t)q] * a1 * av[(size_t)q2] * av[(size_t)q3]);
      }
    }
    mode[(size_t)q] = c_p2 * av[(size_t)q] * g2[(size_t)q] * inner;
  }
  out.P2 = lat.idft_real(mode);

  // tadpole: one pairing closes into the equal-time variance sum
  double s1 = 0;
  for (long long k = 0; k < S; ++k) s1 += g2[(size_t)k];
  double c_pt = -6.0 * dt * dt * dt / (vol * vol) / (double)S * s1;
  for (long long q = 0; q < S; ++q)
    mode[(size_t)q] = c_pt * av[(size_t)q] * g2[(size_t)q] * g2[(size_t)q];
  out.PT = lat.idft_real(mode);
  return out;
}

void PipelineConfig::validate() const {
  sim.validate(lattice);
  noise.validate();
  if (sim.p != 3) throw ConfigError("identification pipeline supports p = 3 only");
  if (!(sim.lambda > 0)) throw ConfigError("pipeline needs a positive coupling");
  if (batches < 2) throw ConfigError("pipeline needs at least 2 batches");
  if (sim.samples < batches) throw ConfigError("fewer measurements than batches");
  if (refit_rounds < 0) throw ConfigError("refit_rounds must be >= 0");
}

namespace {

struct PointEstimate {
  double c2 = 0, c4 = 0, kurt = 0;
  bool clamped = false;
  FitResult fit;
};

// Iterated fit on one Richardson-extrapolated correlation field: alternate
// between subtracting the c2^2 tadpole and refitting the two linear kernels,
// then project the c4 kernel on the fully corrected remainder. The clamp
// applies only to the subtraction, never to the reported c2.
PointEstimate estimate_from_field(const Field& R, const DiscreteKernels& kern,
                                  double lambda, int rounds, const Lattice& lat) {
  PointEstimate pe;
  pe.fit = fit_first_order(R, kern.P1, kern.P2, lambda, lat);
  double c2 = pe.fit.c2;
  Field target(R.size());
  for (int round = 0; round < rounds; ++round) {
    double c2c = c2 > 0 ? c2 : (pe.clamped = true, 0.0);
    for (size_t i = 0; i < R.size(); ++i)
      target[i] = R[i] - lambda * c2c * c2c * kern.PT[i];
    pe.fit = fit_first_order(target, kern.P1, kern.P2, lambda, lat);
    c2 = pe.fit.c2;
  }
  double c2c = c2 > 0 ? c2 : (pe.clamped = true, 0.0);
  double num = 0, den = 0;
  for (size_t i = 0; i < R.size(); ++i) {
    double rem = R[i] - c2c * kern.P1[i] - lambda * c2c * c2c * kern.PT[i];
    num += kern.P2[i] * rem;
    den += kern.P2[i] * kern.P2[i];
  }
  pe.c2 = c2;
  pe.c4 = num / (lambda * den);
  pe.kurt = pe.c4 / (c2 * c2);
  return pe;
}

} // namespace

PipelineResult identify_noise(const PipelineConfig& cfg) {
  cfg.validate();
  Lattice lat(cfg.lattice);
  double lambda = cfg.sim.lambda;

  auto trajs = simulate_coupled(cfg.noise, cfg.sim, cfg.lattice, {},
                                {lambda, lambda / 8, 0.0});
  int B = cfg.batches;
  auto Ffull = batch_correlations(trajs[0], B);
  auto Fmid = batch_correlations(trajs[1], B);
  auto Fzero = batch_correlations(trajs[2], B);

  // per batch, eliminate the O(lambda^2) term:
  //   R = F0 + (64 (F_mid - F0) - (F_full - F0)) / 7 = F0 + lambda F' - lambda^3 F'''/48
  // The middle chain sits close to zero coupling because the coupled chains share
  // noise increments: the fluctuation of F_mid - F0 scales with the coupling gap,
  // so a small middle coupling shrinks both the cubic leftover and the variance.
  size_t S = Ffull[0].size();
  std::vector<Field> R((size_t)B, Field(S));
  for (int b = 0; b < B; ++b)
    for (size_t s = 0; s < S; ++s)
      R[(size_t)b][s] = Fzero[(size_t)b][s] +
                        (64 * (Fmid[(size_t)b][s] - Fzero[(size_t)b][s]) -
                         (Ffull[(size_t)b][s] - Fzero[(size_t)b][s])) / 7;

  auto kern = discretization_matched_kernels(lat, cfg.sim.dt);

  Field pooled(S, 0.0);
  for (const auto& rb : R)
    for (size_t s = 0; s < S; ++s) pooled[s] += rb[s];
  for (double& v : pooled) v /= B;

  auto point = estimate_from_field(pooled, kern, lambda, cfg.refit_rounds, lat);

  // leave-one-batch-out jackknife
  std::vector<PointEstimate> loo((size_t)B);
  Field drop(S);
  for (int b = 0; b < B; ++b) {
    for (size_t s = 0; s < S; ++s)
      drop[s] = (pooled[s] * B - R[(size_t)b][s]) / (B - 1);
    loo[(size_t)b] = estimate_from_field(drop, kern, lambda, cfg.refit_rounds, lat);
  }
  auto jack_se = [&](auto&& get) {
    double mean = 0;
    for (const auto& e : loo) mean += get(e);
    mean /= B;
    double ss = 0;
    for (const auto& e : loo) {
      double d = get(e) - mean;
      ss += d * d;
    }
    return std::sqrt(ss * (B - 1) / (double)B);
  };

  PipelineResult out;
  out.c2 = point.c2;
  out.c4 = point.c4;
  out.kurtosis = point.kurt;
  out.c2_se = jack_se([](const PointEstimate& e) { return e.c2; });
  out.c4_se = jack_se([](const PointEstimate& e) { return e.c4; });
  out.kurtosis_se = jack_se([](const PointEstimate& e) { return e.kurt; });
  out.label = classify_kurtosis(out.kurtosis, cfg.k_zero, cfg.k_jump);
  out.batches = B;
  out.c2_clamped = point.clamped;
  out.corrected = std::move(pooled);
  out.fit = point.fit;
  return out;
}

} // namespace levypw
