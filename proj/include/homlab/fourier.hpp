#pragma once

// Periodic functions on [0, 2pi] stored by their Fourier coefficients
// <f, e_k> = (1/2pi) int f(x) e^{-ikx} dx for k in [-N/2, N/2).

#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace homlab {

using cplx = std::complex<double>;

/// Number of cells 1/eps in the periodic box. Only integer cell counts are
/// admissible, so the ratio is stored as that integer.
class CellRatio {
 public:
  explicit CellRatio(int cells);
  /// Accepts eps whose reciprocal is an integer to within 1e-9.
  static CellRatio from_eps(double eps);

  int cells() const noexcept { return cells_; }
  double eps() const noexcept { return 1.0 / cells_; }

  friend bool operator==(CellRatio, CellRatio) = default;

 private:
  int cells_;
};

class SpectralField {
 public:
  SpectralField() = default;
  /// Zero field with n modes; n must be even and positive.
  explicit SpectralField(int n);

  static SpectralField mode(int n, int k, cplx amplitude = 1.0);
  static SpectralField from_modes(int n, std::initializer_list<std::pair<int, cplx>> modes);
  static SpectralField constant(int n, double value);

  int size() const noexcept { return n_; }
  int kmin() const noexcept { return -n_ / 2; }
  int kmax() const noexcept { return n_ / 2 - 1; }
  bool contains(int k) const noexcept { return k >= kmin() && k <= kmax(); }

  /// Coefficient at k; zero outside the stored band.
  cplx operator[](int k) const noexcept { return contains(k) ? c_[k + n_ / 2] : cplx{}; }
  cplx& at(int k);
  void set(int k, cplx value) { at(k) = value; }

  std::span<const cplx> coeffs() const noexcept { return c_; }
  std::span<cplx> coeffs() noexcept { return c_; }

  /// Zero-pads or truncates to n modes.
  SpectralField resized(int n) const;
  /// Largest |k| with |coeff| > tol, or -1 for the zero field.
  int bandwidth(double tol = 0.0) const;

  /// Conjugate symmetry coeff(-k) = conj(coeff(k)) within tol (absolute), with
  /// the unpaired Nyquist coefficient required to be real.
  bool is_real(double tol) const;
  /// Replaces the field by its real part.
  void enforce_real();

  /// Point values at x_j = 2 pi j / points.
  std::vector<cplx> to_grid(int points) const;
  std::vector<double> to_real_grid(int points) const;
  static SpectralField from_grid(std::span<const cplx> values, int n);
  static SpectralField from_real_grid(std::span<const double> values, int n);

  SpectralField derivative(int order = 1) const;
  SpectralField conj() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(cplx scale);
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, cplx s) { return a *= s; }
  friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

 private:
  int n_ = 0;
  std::vector<cplx> c_;
};

/// <f, g> = sum_k f_k conj(g_k); the coarser field is zero-padded.
cplx inner_product(const SpectralField& f, const SpectralField& g);
double l2_norm(const SpectralField& f);
/// (sum_k (1+k^2)^s |f_k|^2)^{1/2}
double sobolev_norm(const SpectralField& f, double s);
/// (sum_{k != 0} |k|^{-2s} |f_k|^2)^{1/2}; throws MeanNotZero unless
/// |<f,1>| <= mean_zero_tol * ||f|| (default tolerance 1e-10).
double seminorm_neg(const SpectralField& f, double s, double mean_zero_tol = 1e-10);

/// Pointwise product on a 3/2-padded grid, truncated to max(N_f, N_g) modes.
SpectralField multiply(const SpectralField& f, const SpectralField& g);
/// Exact product of two trigonometric polynomials (full convolution, no
/// truncation): the result has enough modes to hold every product term.
SpectralField convolve_exact(const SpectralField& f, const SpectralField& g);

/// q(x/eps) e^{ikx} on n_out modes: coefficient j of q lands on k + j/eps.
/// Throws ResolutionTooSmall when some nonzero coefficient would fall outside.
SpectralField oscillate(const SpectralField& q, CellRatio ratio, int k, int n_out);

/// Value of the trigonometric polynomial at a point (direct sum).
cplx evaluate(const SpectralField& f, double x);

}  // namespace homlab
