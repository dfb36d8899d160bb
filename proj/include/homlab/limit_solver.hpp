#pragma once

// The homogenised equations du = mu u_xx dt + sum_m c_m e_m dW_m: each mode is
// an independent complex OU process.

#include <cstdint>
#include <span>
#include <vector>

#include "homlab/fourier.hpp"
#include "homlab/noise_model.hpp"
#include "homlab/rng.hpp"
#include "homlab/spde_solver.hpp"

namespace homlab {

enum class LimitRule { Thm1, Thm2, Thm3, Corollary };

std::string to_string(LimitRule r);
LimitRule limit_rule_from_string(const std::string& name);

struct LimitModel {
  double mu = 1.0;
  LimitRule rule = LimitRule::Thm1;
  int cutoff = 8;
  /// c_m for m = -cutoff .. cutoff.
  std::vector<cplx> coefficients;

  /// Coefficients from a noise specification and a cell density.
  static LimitModel from_noise(double mu, LimitRule rule, const NoiseSpec& spec, const SpectralField& rho, int cutoff);
  /// c_m = c for every m.
  static LimitModel constant(double mu, cplx c, int cutoff);

  cplx coefficient(int m) const;
};

/// x_{n+1} = e^{-mu m^2 dt_n} x_n + xi_n with xi_n exactly distributed,
/// x_0 = 0. Uses the stream's index m; the conjugate mode reuses it so that
/// the trajectories of m and -m are conjugate.
std::vector<cplx> ou_exact_sample(const LimitModel& model, int m, std::span<const double> t_grid,
                                  const CounterStream& stream);

/// E|x(t)|^2 for the exact OU mode.
double ou_variance(const LimitModel& model, int m, double t);
/// |c_m|^2 / (2 mu m^2); ZeroMode for m = 0.
double stationary_variance(const LimitModel& model, int m);

/// sup_n sum_{|m| <= M} (1 + m^2)^{-s} |<u_eps(t_n) - u(t_n), e_m>|^2 for one path.
/// GridMismatch unless both outputs share times and watched modes.
double hminus_error_functional(const PathOutput& eps_path, const PathOutput& limit_path, double s, int cutoff);

}  // namespace homlab
