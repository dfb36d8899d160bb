#pragma once

// Unit-cell problems for L = b d/dx + (sigma^2 / 2) d^2/dx^2 on [0, 2pi]:
// invariant density rho (L* rho = 0, <rho, 1> = 1), corrector chi
// (L chi = -b, <chi, rho> = 0), effective diffusivity mu and spectral gap.

#include <span>
#include <string>
#include <vector>

#include "homlab/fourier.hpp"
#include "homlab/linalg.hpp"

namespace homlab {

struct Coefficients {
  SpectralField b;
  SpectralField sigma;
  double delta = 0.0;
  double delta_prime = 0.0;

  /// b = 0 and constant sigma.
  static Coefficients heat(double sigma_value);
  /// Gradient drift b = -V' for V = amplitude * cos x, constant sigma.
  static Coefficients cosine_potential(double amplitude, double sigma_value = 1.0);
  /// Explicit trigonometric polynomials. Ellipticity bounds default to the
  /// extrema of sigma on a fine grid when not supplied (<= 0).
  static Coefficients from_fourier(SpectralField b, SpectralField sigma, double delta = 0.0,
                                   double delta_prime = 0.0);

  /// Exact Fourier coefficients of sigma^2.
  SpectralField sigma_squared() const;
  /// Largest harmonic present in b or sigma^2.
  int max_harmonic() const;
};

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct ValidationReport {
  std::vector<Check> checks;
  bool passed() const;
};

/// Report-style: never throws.
ValidationReport validate_assumption1(const Coefficients& c);

/// Galerkin matrix of L_eps = (1/eps) b(x/eps) d/dx + (1/2) sigma^2(x/eps) d^2/dx^2
/// restricted to the given wavenumbers: entry (i, j) = <L_eps e_{w_j}, e_{w_i}>.
/// The wavenumbers are expected to share a residue class modulo 1/eps.
CMatrix generator_block(const Coefficients& c, CellRatio ratio, std::span<const int> wavenumbers);

/// Wavenumbers m + j/eps for |j| <= half_width.
std::vector<int> class_window(int m, CellRatio ratio, int half_width);

struct CellSolution {
  SpectralField rho;
  SpectralField chi;
  double mu = 0.0;
  double omega = 0.0;
  double omega_r_squared = 0.0;
  double rho_residual = 0.0;
  double chi_residual = 0.0;
};

struct CellOptions {
  int modes = 64;
};

SpectralField invariant_density(const Coefficients& c, const CellOptions& opt = {});
SpectralField corrector_chi(const Coefficients& c, const SpectralField& rho, const CellOptions& opt = {});
double effective_mu(const Coefficients& c, const SpectralField& rho, const SpectralField& chi);

/// ||L* rho|| and ||L chi + b|| for the solutions above (Galerkin residuals).
double density_residual(const Coefficients& c, const SpectralField& rho);
double corrector_residual(const Coefficients& c, const SpectralField& chi);

struct DecayOracleOptions {
  double horizon = 10.0;
  int half_width = 12;
  double min_r_squared = 0.999;
};

struct DecayOracleResult {
  double mu_hat = 0.0;
  double rate = 0.0;
  double r_squared = 0.0;
  std::vector<double> times;
  std::vector<double> projection;
};

/// Evolves f' = L_eps* f from e_m with the trapezoid rule
/// (dt = min(1e-3, 0.1 eps^2)), projects onto rho^eps e_m and fits the
/// exponential decay over [2 eps^2, T]. mu_hat = rate / m^2.
DecayOracleResult mu_decay_oracle(const Coefficients& c, const SpectralField& rho, CellRatio ratio, int m,
                                  const DecayOracleOptions& opt = {});

struct GapOptions {
  double dt = 1e-2;
  double max_time = 2000.0;
  /// The fit uses times where ||g(t)|| / ||g(0)|| lies in [lower, upper].
  double upper = 1e-3;
  double lower = 1e-11;
};

struct GapResult {
  double omega = 0.0;
  double r_squared = 0.0;
  bool used_probe = false;
};

/// Decay rate of ||S*(t) g|| with g = 1 - rho, or a fixed mean-zero probe
/// when rho is constant (so that 1 - rho vanishes).
GapResult spectral_gap(const Coefficients& c, const SpectralField& rho, const GapOptions& opt = {});

/// Full cell solve: rho, chi, mu, omega and residuals.
CellSolution solve_cell(const Coefficients& c, const CellOptions& opt = {});

}  // namespace homlab
