#pragma once

// The noise family q_k(x / eps) e_k(x) dW_k: profiles q_k, the assumption
// validators and the limiting noise coefficients.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homlab/cell_problem.hpp"
#include "homlab/fourier.hpp"
#include "homlab/rng.hpp"

namespace homlab {

enum class NoiseFamily { ConstantWhite, PowerDecay, TailConvergent, Custom };

std::string to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& name);

/// Symbol phi of a mollifier, with phi(0) = 1.
struct Mollifier {
  enum class Kind { One, Tent, Bump, Delta };
  Kind kind = Kind::One;
  /// Support half-width for Tent and Bump.
  double width = 1.0;

  double operator()(double l) const;
};

std::string to_string(Mollifier::Kind k);
Mollifier::Kind mollifier_kind_from_string(const std::string& name);

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::ConstantWhite;
  /// Noise acts on wavenumbers |k| <= cutoff.
  int cutoff = 32;
  double alpha = 0.0;
  double tau = 1.0;
  double eta = 0.0;
  /// Base profile p (PowerDecay) and tail perturbation r (TailConvergent).
  SpectralField base = SpectralField::constant(16, 1.0);
  SpectralField perturbation = SpectralField(16);
  /// Tail profile qbar.
  SpectralField tail = SpectralField::constant(16, 1.0);
  /// Custom profiles indexed by |k|; the last entry repeats beyond the table.
  std::vector<SpectralField> table;
  std::optional<Mollifier> mollifier;
  /// Profiles are multiplied by this (0 switches the noise off).
  double amplitude = 1.0;

  /// q_k = 1 for every k.
  static NoiseSpec constant_white(int cutoff);
  /// q_k = (1 v |k|)^{-alpha} p, qbar = p.
  static NoiseSpec power_decay(int cutoff, double alpha, SpectralField p);
  /// Same family with p replaced by p - <p, rho>, so that <q_k, rho> = 0.
  static NoiseSpec centered_power_decay(int cutoff, double alpha, const SpectralField& p, const SpectralField& rho);
  /// q_k = qbar + (1 v |k|)^{-tau} r.
  static NoiseSpec tail_convergent(int cutoff, double tau, SpectralField qbar, SpectralField r);
  static NoiseSpec custom(int cutoff, std::vector<SpectralField> table, SpectralField qbar, double alpha = 0.0);

  /// Profile q_k (real, band-limited). Symmetric in k.
  SpectralField profile(int k) const;
  /// Tail profile scaled by the amplitude.
  SpectralField tail_profile() const;
  /// phi(eps k), or 1 without a mollifier.
  double mollifier_weight(double x) const;
};

struct AssumptionReport {
  std::vector<Check> checks;
  /// Wavenumbers (or partial-sum cutoffs) and the reported sequence.
  std::vector<int> k;
  std::vector<double> series;
  bool passed() const;
};

/// sup_k ||q_k|| / (1 ^ |k|^{-alpha}) and, for alpha <= 1/2, the H^1 size of
/// the normalised profiles. A bound that still grows across the last dyadic
/// block is reported as a failure.
AssumptionReport validate_assumption2(const NoiseSpec& spec, int ktest);
/// ||k^alpha q_k - qbar|| at dyadic k.
AssumptionReport validate_assumption3(const NoiseSpec& spec, int ktest);
/// Partial sums of (1 ^ |k|^{-eta}) ||q_k - qbar||_{H^1}^2 at dyadic cutoffs.
AssumptionReport validate_assumption4(const NoiseSpec& spec, int ktest);

/// <q_m, rho>
cplx coeff_thm1(const NoiseSpec& spec, const SpectralField& rho, int m);
/// ||qbar rho||_{-alpha}; MeanNotZero unless <qbar, rho> = 0.
double coeff_thm2(const NoiseSpec& spec, const SpectralField& rho);
/// (|<q_m, rho>|^2 - |<qbar, rho>|^2 + ||qbar rho||^2)^{1/2}
double coeff_thm3(const NoiseSpec& spec, const SpectralField& rho, int m);
/// coeff_thm3 with ||qbar rho||^2 replaced by sum_l |phi(l)|^2 |<qbar rho, e_l>|^2.
double coeff_corollary(const NoiseSpec& spec, const SpectralField& rho, int m);

enum class LambdaScale { None, EpsNegAlpha };

struct LambdaSeries {
  double lambda = 0.0;
  std::vector<int> l;
  std::vector<cplx> terms;
  /// Lambda minus Lambda restricted to the inner half of the admissible |l| range.
  double tail = 0.0;
};

/// lambda^l = s phi(eps m + l) <q_{m + l/eps} e_l, rho> over every l with
/// |m + l/eps| <= cutoff (phi = 1 without a mollifier). Throws
/// TruncationTooSmall when the tail exceeds 1% of Lambda, unless told not to.
LambdaSeries lambda_series(const NoiseSpec& spec, const SpectralField& rho, CellRatio ratio, int m,
                           LambdaScale scale, bool throw_on_truncation = true);

/// Sum_k q_k(x/eps) e_k(x) dW_k on n_out modes.
SpectralField assemble_noise(const NoiseSpec& spec, CellRatio ratio, const WienerBatch& dw, int n_out);

}  // namespace homlab
