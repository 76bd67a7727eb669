#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace levypw {

// Thrown for invalid configuration values (maps to CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown for numeric failures: blow-up, degenerate designs, cap overruns
// (maps to CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LatticeConfig {
  int d = 1;        // space dimension
  double delta = 1; // lattice spacing
  int L = 2;        // sites per dimension, periodic
  double m = 1;     // mass

  void validate() const;
  long long sites() const;
  double cell_volume() const; // delta^d
};

// dispersion 2 delta^-2 (d - sum_j cos(delta p_j)) + m^2; p need not lie on the grid
double mu_squared(const std::vector<double>& p, const LatticeConfig& cfg);

using Field = std::vector<double>; // one value per site, row-major over coordinates

// Periodic torus of L^d sites with precomputed mode table and DFT twiddles.
// Immutable after construction; all methods are const and thread-safe.
class Lattice {
 public:
  explicit Lattice(LatticeConfig cfg);

  const LatticeConfig& config() const { return cfg_; }
  int dim() const { return cfg_.d; }
  int extent() const { return cfg_.L; }
  double spacing() const { return cfg_.delta; }
  double mass() const { return cfg_.m; }
  long long sites() const { return sites_; }
  double cell_volume() const { return cell_vol_; }

  long long index(const std::vector<int>& x) const; // wraps mod L
  std::vector<int> coords(long long i) const;
  long long shift(long long i, int axis, int by) const;

  // mode index space coincides with the site index space
  double mu2(long long mode) const { return mu2_[mode]; }
  const std::vector<double>& mu2_table() const { return mu2_; }
  double mu2_max() const { return mu2_max_; }
  long long mode_add(long long a, long long b) const;
  long long mode_neg(long long a) const;

  double min_image_norm2(long long site) const; // squared torus distance, length units

  // site-normalized transforms: dft F(k) = sum_x e^{-2 pi i k.x / L} f(x),
  // idft f(x) = (1/L^d) sum_k e^{+2 pi i k.x / L} F(k)
  std::vector<std::complex<double>> dft(const Field& f) const;
  Field idft_real(const std::vector<std::complex<double>>& F) const;
  Field idft_real(const std::vector<double>& F) const; // real even spectra

  // (Lap f)(x) = delta^-2 sum_axis (f(x+e) + f(x-e) - 2 f(x))
  void laplacian(const Field& f, Field& out) const;

 private:
  LatticeConfig cfg_;
  long long sites_ = 0;
  double cell_vol_ = 1;
  double mu2_max_ = 0;
  std::vector<double> mu2_;
  std::vector<std::complex<double>> tw_; // L x L table, e^{-2 pi i j k / L}
  std::vector<long long> stride_;

  void transform_axes(std::vector<std::complex<double>>& buf, bool forward) const;
};

Field heat_kernel(const Lattice& lat, double t); // t >= 0, else ConfigError
Field green(const Lattice& lat, double t);       // theta(t) * heat kernel, theta(0) = 0
Field convolve(const Lattice& lat, const Field& f, const Field& g); // delta^d sum
Field dirac(const Lattice& lat);                   // delta^-d at the origin
double field_sum(const Lattice& lat, const Field& f); // delta^d * sum over sites

} // namespace levypw
