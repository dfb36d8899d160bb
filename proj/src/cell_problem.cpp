#include "homlab/cell_problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "homlab/errors.hpp"
#include "homlab/fit.hpp"

namespace homlab {

namespace {

constexpr int kCheckGrid = 4096;

std::vector<int> full_band(int n) {
  std::vector<int> w(n);
  std::iota(w.begin(), w.end(), -n / 2);
  return w;
}

CVector to_vector(const SpectralField& f, std::span<const int> wavenumbers) {
  CVector v(static_cast<Eigen::Index>(wavenumbers.size()));
  for (std::size_t i = 0; i < wavenumbers.size(); ++i) v[i] = f[wavenumbers[i]];
  return v;
}

SpectralField to_field(const CVector& v, std::span<const int> wavenumbers, int n) {
  SpectralField f(n);
  for (std::size_t i = 0; i < wavenumbers.size(); ++i) f.at(wavenumbers[i]) = v[i];
  return f;
}

int modes_for(const Coefficients& c, const CellOptions& opt) {
  int n = std::max(opt.modes, 4 * (c.max_harmonic() + 1));
  return n + n % 2;
}

}  // namespace

Coefficients Coefficients::heat(double sigma_value) {
  return from_fourier(SpectralField(8), SpectralField::constant(8, sigma_value));
}

Coefficients Coefficients::cosine_potential(double amplitude, double sigma_value) {
  // V = A cos x, b = -V' = A sin x = (A / 2i)(e_1 - e_{-1}).
  SpectralField b(8);
  b.at(1) = cplx(0.0, -0.5 * amplitude);
  b.at(-1) = cplx(0.0, 0.5 * amplitude);
  return from_fourier(std::move(b), SpectralField::constant(8, sigma_value));
}

Coefficients Coefficients::from_fourier(SpectralField b, SpectralField sigma, double delta, double delta_prime) {
  Coefficients c;
  const int n = std::max({b.size(), sigma.size(), 2});
  c.b = b.resized(n);
  c.sigma = sigma.resized(n);
  const auto values = c.sigma.to_real_grid(kCheckGrid);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  c.delta = delta > 0.0 ? delta : *lo;
  c.delta_prime = delta_prime > 0.0 ? delta_prime : *hi;
  return c;
}

SpectralField Coefficients::sigma_squared() const { return convolve_exact(sigma, sigma); }

int Coefficients::max_harmonic() const {
  constexpr double tol = 1e-15;
  return std::max({b.bandwidth(tol), sigma_squared().bandwidth(tol), 0});
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& ch) { return ch.passed; });
}

ValidationReport validate_assumption1(const Coefficients& c) {
  ValidationReport report;
  const auto sigma = c.sigma.to_real_grid(kCheckGrid);
  const auto [lo, hi] = std::minmax_element(sigma.begin(), sigma.end());

  report.checks.push_back({"sigma_real", c.sigma.is_real(1e-12 * std::max(1.0, l2_norm(c.sigma))),
                           0.0, 1e-12});
  report.checks.push_back({"b_real", c.b.is_real(1e-12 * std::max(1.0, l2_norm(c.b))), 0.0, 1e-12});
  report.checks.push_back({"delta_positive", c.delta > 0.0, c.delta, 0.0});
  report.checks.push_back({"sigma_lower_bound", *lo > 0.0 && *lo >= c.delta, *lo, c.delta});
  report.checks.push_back({"sigma_upper_bound", *hi <= c.delta_prime, *hi, c.delta_prime});

  // centering: (1/2pi) int b / sigma^2 on the grid; meaningless if sigma hits 0.
  const auto b = c.b.to_real_grid(kCheckGrid);
  double mean = 0.0, sq = 0.0;
  bool finite = *lo > 0.0;
  for (int j = 0; finite && j < kCheckGrid; ++j) {
    const double v = b[j] / (sigma[j] * sigma[j]);
    mean += v;
    sq += v * v;
  }
  mean /= kCheckGrid;
  const double norm = std::sqrt(sq / kCheckGrid);
  const double centering = finite ? std::abs(mean) : std::numeric_limits<double>::infinity();
  report.checks.push_back({"centering", finite && centering <= 1e-10 * std::max(norm, 1e-300) + 1e-300,
                           centering, 1e-10 * norm});
  return report;
}

CMatrix generator_block(const Coefficients& c, CellRatio ratio, std::span<const int> wavenumbers) {
  const SpectralField s = c.sigma_squared();
  const int cells = ratio.cells();
  const Eigen::Index n = static_cast<Eigen::Index>(wavenumbers.size());
  const int band = c.max_harmonic();
  CMatrix a = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = wavenumbers[j];
    for (Eigen::Index i = 0; i < n; ++i) {
      const int diff = wavenumbers[i] - wavenumbers[j];
      if (diff % cells != 0) continue;
      const int p = diff / cells;
      if (std::abs(p) > band) continue;
      // (1/eps) b_p (i w) - (1/2) s_p w^2
      a(i, j) = double(cells) * c.b[p] * cplx(0.0, w) - 0.5 * s[p] * w * w;
    }
  }
  return a;
}

std::vector<int> class_window(int m, CellRatio ratio, int half_width) {
  std::vector<int> w;
  for (int j = -half_width; j <= half_width; ++j) w.push_back(m + j * ratio.cells());
  return w;
}

namespace {

SpectralField solve_density(const Coefficients& c, int n) {
  const auto w = full_band(n);
  CMatrix adj = generator_block(c, CellRatio(1), w).adjoint();
  // Row k = 0 of L* vanishes identically (it is d/dx of something); it is
  // replaced by the normalisation <rho, 1> = rho_0 = 1.
  const Eigen::Index zero = n / 2;
  adj.row(zero).setZero();
  adj(zero, zero) = 1.0;
  CVector rhs = CVector::Zero(n);
  rhs[zero] = 1.0;
  Eigen::FullPivLU<CMatrix> lu(adj);
  if (!lu.isInvertible()) throw Error(ErrorCode::SolveFailed, "L* has a kernel larger than one dimension");
  const CVector sol = lu.solve(rhs);
  if (!sol.allFinite()) throw Error(ErrorCode::SolveFailed, "non-finite invariant density");
  SpectralField rho = to_field(sol, w, n);
  rho.enforce_real();
  return rho;
}

// Largest coefficient in the outer eighth of the band.
double band_edge(const SpectralField& f) {
  double edge = 0.0;
  for (int k = f.kmin(); k <= f.kmax(); ++k) {
    if (std::abs(k) >= f.size() / 2 - f.size() / 8) edge = std::max(edge, std::abs(f[k]));
  }
  return edge;
}

constexpr int kMaxCellModes = 1024;

}  // namespace

SpectralField invariant_density(const Coefficients& c, const CellOptions& opt) {
  int n = modes_for(c, opt);
  SpectralField rho = solve_density(c, n);
  while (band_edge(rho) > 1e-14 * l2_norm(rho) && 2 * n <= kMaxCellModes) {
    n *= 2;
    rho = solve_density(c, n);
  }
  const auto values = rho.to_real_grid(std::max(kCheckGrid, 2 * n));
  if (*std::min_element(values.begin(), values.end()) <= 0.0) {
    throw Error(ErrorCode::SolveFailed, "invariant density is not positive; resolution too small?");
  }
  return rho;
}

SpectralField corrector_chi(const Coefficients& c, const SpectralField& rho, const CellOptions& opt) {
  const int n = std::max(modes_for(c, opt), rho.size());
  const auto w = full_band(n);
  const CMatrix l = generator_block(c, CellRatio(1), w);
  const CVector r = to_vector(rho, w);
  // Bordered system [L r; r^H 0] [chi; lambda] = [-b; 0]. The range of L is
  // orthogonal to rho, so lambda = 0 whenever <b, rho> = 0.
  CMatrix sys = CMatrix::Zero(n + 1, n + 1);
  sys.topLeftCorner(n, n) = l;
  sys.col(n).head(n) = r;
  sys.row(n).head(n) = r.adjoint();
  CVector rhs = CVector::Zero(n + 1);
  rhs.head(n) = -to_vector(c.b, w);
  Eigen::FullPivLU<CMatrix> lu(sys);
  if (!lu.isInvertible()) throw Error(ErrorCode::SolveFailed, "corrector system is singular");
  const CVector sol = lu.solve(rhs);
  if (!sol.allFinite()) throw Error(ErrorCode::SolveFailed, "non-finite corrector");
  SpectralField chi = to_field(sol.head(n), w, n);
  chi.enforce_real();
  return chi;
}

double effective_mu(const Coefficients& c, const SpectralField& rho, const SpectralField& chi) {
  const SpectralField s = c.sigma_squared();
  const int n = std::max({rho.size(), chi.size(), s.size()});
  const int points = 4 * n;
  SpectralField w = chi.derivative(1);
  w += SpectralField::constant(2, 1.0);
  const auto sv = s.to_real_grid(points);
  const auto wv = w.to_real_grid(points);
  const auto rv = rho.to_real_grid(points);
  double sum = 0.0;
  for (int j = 0; j < points; ++j) sum += 0.5 * sv[j] * wv[j] * wv[j] * rv[j];
  return sum / points;
}

double density_residual(const Coefficients& c, const SpectralField& rho) {
  const int n = rho.size() + 4 * (c.max_harmonic() + 1);
  const auto w = full_band(n);
  const CVector res = generator_block(c, CellRatio(1), w).adjoint() * to_vector(rho, w);
  return res.norm();
}

double corrector_residual(const Coefficients& c, const SpectralField& chi) {
  const int n = chi.size() + 4 * (c.max_harmonic() + 1);
  const auto w = full_band(n);
  const CVector res = generator_block(c, CellRatio(1), w) * to_vector(chi, w) + to_vector(c.b, w);
  return res.norm();
}

DecayOracleResult mu_decay_oracle(const Coefficients& c, const SpectralField& rho, CellRatio ratio, int m,
                                  const DecayOracleOptions& opt) {
  const double eps = ratio.eps();
  if (!(eps * std::abs(m) < 0.5) || m == 0) {
    throw Error(ErrorCode::InvalidConfig, "decay oracle needs m != 0 and eps |m| < 1/2");
  }
  const auto w = class_window(m, ratio, opt.half_width);
  const CMatrix adj = generator_block(c, ratio, w).adjoint();
  const double dt = std::min(1e-3, 0.1 * eps * eps);
  const int steps = static_cast<int>(std::ceil(opt.horizon / dt));
  const double h = opt.horizon / steps;
  const CMatrix prop = trapezoid_propagator(adj, h);

  // rho^eps e_m has coefficient rho_j at m + j / eps.
  CVector target(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) target[i] = rho[(w[i] - m) / ratio.cells()];
  CVector f = CVector::Zero(static_cast<Eigen::Index>(w.size()));
  f[opt.half_width] = 1.0;

  DecayOracleResult out;
  const int stride = std::max(1, steps / 2000);
  for (int n = 0; n <= steps; ++n) {
    if (n % stride == 0 || n == steps) {
      out.times.push_back(n * h);
      out.projection.push_back(std::abs(target.dot(f)));  // dot is conj-linear in the first argument
    }
    if (n < steps) f = prop * f;
  }
  const DecayFit fit = fit_exponential_decay(out.times, out.projection, 2.0 * eps * eps, opt.horizon);
  if (fit.r_squared < opt.min_r_squared) {
    throw Error(ErrorCode::FitFailed, "projection is not log-linear (R^2 = " + std::to_string(fit.r_squared) + ")");
  }
  out.rate = fit.rate;
  out.r_squared = fit.r_squared;
  out.mu_hat = fit.rate / (double(m) * m);
  return out;
}

GapResult spectral_gap(const Coefficients& c, const SpectralField& rho, const GapOptions& opt) {
  const int n = rho.size();
  const auto w = full_band(n);
  const CMatrix adj = generator_block(c, CellRatio(1), w).adjoint();
  SpectralField g0 = SpectralField::constant(n, 1.0) - rho;
  GapResult out;
  if (l2_norm(g0) < 1e-10) {
    g0 = SpectralField(n);
    for (int k = 1; k <= std::min(4, n / 2 - 1); ++k) {
      g0.at(k) = 1.0;
      g0.at(-k) = 1.0;
    }
    out.used_probe = true;
  }
  const CMatrix prop = trapezoid_propagator(adj, opt.dt);
  CVector g = to_vector(g0, w);
  const double g0_norm = g.norm();
  std::vector<double> t, y;
  double time = 0.0;
  while (time < opt.max_time) {
    g = prop * g;
    time += opt.dt;
    const double rel = g.norm() / g0_norm;
    if (rel <= opt.upper && rel >= opt.lower) {
      t.push_back(time);
      y.push_back(rel);
    }
    if (rel < opt.lower) break;
  }
  const DecayFit fit = fit_exponential_decay(t, y, 0.0, opt.max_time);
  out.omega = fit.rate;
  out.r_squared = fit.r_squared;
  if (!(out.omega > 0.0)) throw Error(ErrorCode::FitFailed, "non-positive spectral gap estimate");
  return out;
}

CellSolution solve_cell(const Coefficients& c, const CellOptions& opt) {
  CellSolution sol;
  sol.rho = invariant_density(c, opt);
  sol.chi = corrector_chi(c, sol.rho, opt);
  sol.mu = effective_mu(c, sol.rho, sol.chi);
  const GapResult gap = spectral_gap(c, sol.rho);
  sol.omega = gap.omega;
  sol.omega_r_squared = gap.r_squared;
  sol.rho_residual = density_residual(c, sol.rho);
  sol.chi_residual = corrector_residual(c, sol.chi);
  return sol;
}

}  // namespace homlab
