#include "levypw/lattice.hpp"

#include <cmath>

namespace levypw {

void LatticeConfig::validate() const {
  if (d < 1 || d > 4) throw ConfigError("lattice: d must be in 1..4");
  if (L < 2) throw ConfigError("lattice: L must be >= 2");
  if (!(delta > 0)) throw ConfigError("lattice: delta must be positive");
  if (!(m > 0)) throw ConfigError("lattice: m must be positive");
  double n = std::pow(double(L), d);
  if (n > 1u << 22) throw ConfigError("lattice: L^d too large");
}

long long LatticeConfig::sites() const {
  long long n = 1;
  for (int a = 0; a < d; ++a) n *= L;
  return n;
}

double LatticeConfig::cell_volume() const { return std::pow(delta, d); }

double mu_squared(const std::vector<double>& p, const LatticeConfig& cfg) {
  if ((int)p.size() != cfg.d) throw ConfigError("mu_squared: momentum dimension mismatch");
  double s = 0;
  for (double pj : p) s += 1.0 - std::cos(cfg.delta * pj);
  return 2.0 / (cfg.delta * cfg.delta) * s + cfg.m * cfg.m;
}

Lattice::Lattice(LatticeConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  sites_ = cfg_.sites();
  cell_vol_ = cfg_.cell_volume();
  stride_.assign(cfg_.d, 1);
  for (int a = cfg_.d - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * cfg_.L;

  const double two_pi = 2.0 * M_PI;
  tw_.resize((size_t)cfg_.L * cfg_.L);
  for (int j = 0; j < cfg_.L; ++j)
    for (int k = 0; k < cfg_.L; ++k) {
      double ph = -two_pi * double((long long)j * k % cfg_.L) / cfg_.L;
      tw_[(size_t)j * cfg_.L + k] = {std::cos(ph), std::sin(ph)};
    }

  mu2_.resize(sites_);
  for (long long i = 0; i < sites_; ++i) {
    std::vector<int> k = coords(i);
    std::vector<double> p(cfg_.d);
    for (int a = 0; a < cfg_.d; ++a) p[a] = two_pi * k[a] / (cfg_.delta * cfg_.L);
    double s = 0;
    for (int a = 0; a < cfg_.d; ++a) s += 1.0 - std::cos(cfg_.delta * p[a]);
    mu2_[i] = 2.0 / (cfg_.delta * cfg_.delta) * s + cfg_.m * cfg_.m;
    if (mu2_[i] > mu2_max_) mu2_max_ = mu2_[i];
  }
}

long long Lattice::index(const std::vector<int>& x) const {
  if ((int)x.size() != cfg_.d) throw ConfigError("lattice index: dimension mismatch");
  long long i = 0;
  for (int a = 0; a < cfg_.d; ++a) {
    int c = x[a] % cfg_.L;
    if (c < 0) c += cfg_.L;
    i += stride_[a] * c;
  }
  return i;
}

std::vector<int> Lattice::coords(long long i) const {
  std::vector<int> x(cfg_.d);
  for (int a = 0; a < cfg_.d; ++a) {
    x[a] = int(i / stride_[a]) % cfg_.L;
  }
  return x;
}

long long Lattice::shift(long long i, int axis, int by) const {
  int c = int(i / stride_[axis]) % cfg_.L;
  int cc = (c + by) % cfg_.L;
  if (cc < 0) cc += cfg_.L;
  return i + (long long)(cc - c) * stride_[axis];
}

long long Lattice::mode_add(long long a, long long b) const {
  long long r = 0;
  for (int ax = 0; ax < cfg_.d; ++ax) {
    int ca = int(a / stride_[ax]) % cfg_.L;
    int cb = int(b / stride_[ax]) % cfg_.L;
    r += stride_[ax] * ((ca + cb) % cfg_.L);
  }
  return r;
}

long long Lattice::mode_neg(long long a) const {
  long long r = 0;
  for (int ax = 0; ax < cfg_.d; ++ax) {
    int ca = int(a / stride_[ax]) % cfg_.L;
    r += stride_[ax] * ((cfg_.L - ca) % cfg_.L);
  }
  return r;
}

double Lattice::min_image_norm2(long long site) const {
  double s = 0;
  std::vector<int> x = coords(site);
  for (int a = 0; a < cfg_.d; ++a) {
    int c = std::min(x[a], cfg_.L - x[a]);
    double r = cfg_.delta * c;
    s += r * r;
  }
  return s;
}

void Lattice::transform_axes(std::vector<std::complex<double>>& buf, bool forward) const {
  const int L = cfg_.L;
  std::vector<std::complex<double>> line(L), out(L);
  for (int a = 0; a < cfg_.d; ++a) {
    const long long st = stride_[a];
    const long long nlines = sites_ / L;
    for (long long ln = 0; ln < nlines; ++ln) {
      // base index of this line: enumerate all sites with coordinate 0 on axis a
      long long base = (ln / st) * st * L + (ln % st);
      for (int j = 0; j < L; ++j) line[j] = buf[base + (long long)j * st];
      for (int k = 0; k < L; ++k) {
        std::complex<double> acc = 0;
        const std::complex<double>* row = &tw_[(size_t)k * L];
        if (forward) {
          for (int j = 0; j < L; ++j) acc += row[j] * line[j];
        } else {
          for (int j = 0; j < L; ++j) acc += std::conj(row[j]) * line[j];
        }
        out[k] = acc;
      }
      for (int k = 0; k < L; ++k) buf[base + (long long)k * st] = out[k];
    }
  }
}

std::vector<std::complex<double>> Lattice::dft(const Field& f) const {
  std::vector<std::complex<double>> buf(f.begin(), f.end());
  transform_axes(buf, true);
  return buf;
}

Field Lattice::idft_real(const std::vector<std::complex<double>>& F) const {
  std::vector<std::complex<double>> buf = F;
  transform_axes(buf, false);
  Field out(sites_);
  const double norm = 1.0 / double(sites_);
  for (long long i = 0; i < sites_; ++i) out[i] = buf[i].real() * norm;
  return out;
}

Field Lattice::idft_real(const std::vector<double>& F) const {
  std::vector<std::complex<double>> buf(F.begin(), F.end());
  transform_axes(buf, false);
  Field out(sites_);
  const double norm = 1.0 / double(sites_);
  for (long long i = 0; i < sites_; ++i) out[i] = buf[i].real() * norm;
  return out;
}

void Lattice::laplacian(const Field& f, Field& out) const {
  out.assign(sites_, 0.0);
  const double inv_d2 = 1.0 / (cfg_.delta * cfg_.delta);
  for (int a = 0; a < cfg_.d; ++a) {
    for (long long i = 0; i < sites_; ++i) {
      out[i] += inv_d2 * (f[shift(i, a, 1)] + f[shift(i, a, -1)] - 2.0 * f[i]);
    }
  }
}

Field heat_kernel(const Lattice& lat, double t) {
  if (t < 0) throw ConfigError("heat_kernel: t must be >= 0");
  std::vector<double> spec(lat.sites());
  for (long long k = 0; k < lat.sites(); ++k) spec[k] = std::exp(-t * lat.mu2(k));
  Field g = lat.idft_real(spec);
  const double s = 1.0 / lat.cell_volume();
  for (double& v : g) v *= s;
  return g;
}

Field green(const Lattice& lat, double t) {
  if (t <= 0) return Field(lat.sites(), 0.0);
  return heat_kernel(lat, t);
}

Field convolve(const Lattice& lat, const Field& f, const Field& g) {
  if ((long long)f.size() != lat.sites() || (long long)g.size() != lat.sites())
    throw ConfigError("convolve: field size mismatch");
  auto F = lat.dft(f);
  auto G = lat.dft(g);
  for (long long k = 0; k < lat.sites(); ++k) F[k] *= G[k];
  Field out = lat.idft_real(F);
  const double s = lat.cell_volume();
  for (double& v : out) v *= s;
  return out;
}

Field dirac(const Lattice& lat) {
  Field f(lat.sites(), 0.0);
  f[0] = 1.0 / lat.cell_volume();
  return f;
}

double field_sum(const Lattice& lat, const Field& f) {
  double s = 0;
  for (double v : f) s += v;
  return s * lat.cell_volume();
}

} // namespace levypw
