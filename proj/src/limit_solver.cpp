#include "homlab/limit_solver.hpp"

#include <cmath>

#include "homlab/errors.hpp"
#include "homlab/kernels.hpp"

namespace homlab {

std::string to_string(LimitRule r) {
  switch (r) {
    case LimitRule::Thm1: return "thm1";
    case LimitRule::Thm2: return "thm2";
    case LimitRule::Thm3: return "thm3";
    case LimitRule::Corollary: return "corollary";
  }
  return "?";
}

LimitRule limit_rule_from_string(const std::string& name) {
  for (auto r : {LimitRule::Thm1, LimitRule::Thm2, LimitRule::Thm3, LimitRule::Corollary})
    if (to_string(r) == name) return r;
  throw Error(ErrorCode::InvalidConfig, "unknown limit rule '" + name + "'");
}

LimitModel LimitModel::from_noise(double mu, LimitRule rule, const NoiseSpec& spec, const SpectralField& rho,
                                  int cutoff) {
  LimitModel model;
  model.mu = mu;
  model.rule = rule;
  model.cutoff = cutoff;
  const double thm2 = rule == LimitRule::Thm2 ? coeff_thm2(spec, rho) : 0.0;
  for (int m = -cutoff; m <= cutoff; ++m) {
    switch (rule) {
      case LimitRule::Thm1: model.coefficients.push_back(coeff_thm1(spec, rho, m)); break;
      case LimitRule::Thm2: model.coefficients.push_back(thm2); break;
      case LimitRule::Thm3: model.coefficients.push_back(coeff_thm3(spec, rho, m)); break;
      case LimitRule::Corollary: model.coefficients.push_back(coeff_corollary(spec, rho, m)); break;
    }
  }
  return model;
}

LimitModel LimitModel::constant(double mu, cplx c, int cutoff) {
  LimitModel model;
  model.mu = mu;
  model.cutoff = cutoff;
  model.coefficients.assign(2 * cutoff + 1, c);
  return model;
}

cplx LimitModel::coefficient(int m) const {
  if (std::abs(m) > cutoff) return 0.0;
  return coefficients[m + cutoff];
}

double ou_variance(const LimitModel& model, int m, double t) {
  const double c2 = std::norm(model.coefficient(m));
  if (m == 0) return c2 * t;
  const double rate = model.mu * double(m) * m;
  return c2 * -std::expm1(-2.0 * rate * t) / (2.0 * rate);
}

double stationary_variance(const LimitModel& model, int m) {
  if (m == 0) throw Error(ErrorCode::ZeroMode, "mode 0 is a Brownian motion without a stationary law");
  return std::norm(model.coefficient(m)) / (2.0 * model.mu * double(m) * m);
}

std::vector<cplx> ou_exact_sample(const LimitModel& model, int m, std::span<const double> t_grid,
                                  const CounterStream& stream) {
  std::vector<cplx> out;
  out.reserve(t_grid.size());
  // The coefficient of -m is conj(c_m) (thm1) or equal to it; either way the
  // noise of -m is conj of the noise of m, as for the Wiener increments.
  const cplx c = m >= 0 ? model.coefficient(m) : std::conj(model.coefficient(-m));
  const double rate = model.mu * double(m) * m;
  cplx x = 0.0;
  double t_prev = 0.0;
  for (std::size_t n = 0; n < t_grid.size(); ++n) {
    const double dt = t_grid[n] - t_prev;
    if (dt < 0.0) throw Error(ErrorCode::GridMismatch, "time grid must be nondecreasing");
    if (dt > 0.0) {
      const double var = m == 0 ? dt : -std::expm1(-2.0 * rate * dt) / (2.0 * rate);
      // unit-variance complex Gaussian (real when m = 0), as dW_m / sqrt(dt)
      const cplx z = wiener_increment(stream, n, m, 1.0);
      x = std::exp(-rate * dt) * x + c * std::sqrt(var) * z;
    }
    out.push_back(x);
    t_prev = t_grid[n];
  }
  return out;
}

double hminus_error_functional(const PathOutput& eps_path, const PathOutput& limit_path, double s, int cutoff) {
  if (eps_path.times != limit_path.times || eps_path.watch != limit_path.watch) {
    throw Error(ErrorCode::GridMismatch, "paths must share their time grid and watched modes");
  }
  std::vector<std::size_t> idx;
  std::vector<double> weight;
  for (std::size_t i = 0; i < eps_path.watch.size(); ++i) {
    const int m = eps_path.watch[i];
    if (std::abs(m) <= cutoff) {
      idx.push_back(i);
      weight.push_back(std::pow(1.0 + double(m) * m, -s));
    }
  }
  const auto& kern = kernels::active();
  std::vector<double> re(idx.size()), im(idx.size());
  double sup = 0.0;
  for (std::size_t n = 0; n < eps_path.times.size(); ++n) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const cplx d = eps_path.modes[idx[j]][n] - limit_path.modes[idx[j]][n];
      re[j] = d.real();
      im[j] = d.imag();
    }
    sup = std::max(sup, kern.weighted_abs2_sum(static_cast<int>(idx.size()), weight.data(), re.data(), im.data()));
  }
  return sup;
}

}  // namespace homlab
