#include "homlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "homlab/errors.hpp"
#include "homlab/fit.hpp"
#include "homlab/linalg.hpp"

namespace homlab {

namespace {

void say(const Progress& p, const std::string& msg) {
  if (p) p(msg);
}

ExperimentReport start(const ExperimentConfig& cfg, std::string study) {
  ExperimentReport r;
  r.study = std::move(study);
  r.config_hash = cfg.hash();
  r.seed = cfg.seed;
  return r;
}

std::string eps_label(int cells) { return "eps=1/" + std::to_string(cells); }

// Number of consecutive pairs where the sequence fails to decrease strictly.
double violations(const std::vector<double>& v) {
  int count = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) ++count;
  return count;
}

void require_eps_points(const StudyConfig& s) {
  if (s.cells.size() < 3) throw Error(ErrorCode::FitFailed, "a rate fit needs at least 3 values of eps");
}

void record_fit(ExperimentReport& r, const RateFit& fit, const std::string& prefix) {
  r.put(prefix + "rate", fit.rate);
  r.put(prefix + "intercept", fit.line.intercept);
  r.put(prefix + "r_squared", fit.line.r_squared);
  r.put(prefix + "rms", fit.line.rms);
  r.put(prefix + "points_used", fit.points_used);
  r.put(prefix + "excluded_largest_eps", fit.excluded_largest ? 1.0 : 0.0);
  if (fit.excluded_largest) r.notes.push_back(prefix + "fit excluded the largest eps as pre-asymptotic");
}

void require_validator(const AssumptionReport& rep, const std::string& which) {
  if (rep.passed()) return;
  std::string failed;
  for (const auto& ch : rep.checks)
    if (!ch.passed) failed += (failed.empty() ? "" : ", ") + ch.name;
  throw Error(ErrorCode::InvalidConfig, "noise fails " + which + " (" + failed + ")");
}

PathOutput subsample(const PathOutput& p, int stride) {
  PathOutput out;
  out.watch = p.watch;
  out.modes.resize(p.modes.size());
  for (std::size_t n = 0; n < p.times.size(); n += stride) {
    out.times.push_back(p.times[n]);
    for (std::size_t i = 0; i < p.modes.size(); ++i) out.modes[i].push_back(p.modes[i][n]);
  }
  return out;
}

// Largest |m| admissible at every eps of the study (eps |m| < 1/2), capped at M.
int common_mode_cutoff(const StudyConfig& s) {
  const int smallest = s.cells.front();
  if (smallest == 1) return s.mode_cutoff;
  return std::min(s.mode_cutoff, (smallest - 1) / 2);
}

// Tail of the error functional beyond the watched modes, from the a priori
// bound E|u_m(t)|^2 <= C^2 min(T, 1 / (2 mu m^2)) applied to both processes.
double tail_bound(const NoiseSpec& spec, const SpectralField& rho, double mu, double T, double s, int from, int to) {
  double strength = 0.0;
  for (int k = 0; k <= to; ++k) strength = std::max(strength, l2_norm(spec.profile(k)));
  strength *= l2_norm(rho);
  double sum = 0.0;
  // both signs of m, and E|a - b|^2 <= 2 E|a|^2 + 2 E|b|^2
  for (int m = from + 1; m <= to; ++m)
    sum += 2.0 * std::pow(1.0 + double(m) * m, -s) * 4.0 * strength * strength * std::min(T, 1.0 / (2.0 * mu * m * m));
  return sum;
}

}  // namespace

MeanSE batch_means(std::span<const double> values, int batches) {
  const int n = static_cast<int>(values.size());
  if (n == 0) return {};
  const int b = std::max(1, std::min(batches, n));
  std::vector<double> sums(b, 0.0);
  std::vector<int> counts(b, 0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int slot = static_cast<int>((static_cast<long long>(i) * b) / n);
    sums[slot] += values[i];
    ++counts[slot];
    total += values[i];
  }
  MeanSE out;
  out.mean = total / n;
  out.batches = b;
  if (b < 2) return out;
  double ss = 0.0;
  for (int j = 0; j < b; ++j) {
    const double d = sums[j] / counts[j] - out.mean;
    ss += d * d;
  }
  out.se = std::sqrt(ss / (b - 1) / b);
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(std::max(n, 0));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double default_sobolev_index(LimitRule rule, double alpha, double eta) {
  switch (rule) {
    case LimitRule::Thm1: return std::max(0.0, 1.5 * (1.0 - 2.0 * alpha)) + 0.5;
    case LimitRule::Thm2: return 1.5 * std::max(alpha, 1.0 - alpha) + 0.5;
    case LimitRule::Thm3:
    case LimitRule::Corollary: return eta + 0.5;
  }
  return 1.0;
}

ExperimentReport run_thm1_convergence(const ExperimentConfig& cfg, const Progress& progress) {
  const StudyConfig& st = cfg.study;
  require_eps_points(st);
  ExperimentReport r = start(cfg, "converge");
  const CellSolution cell = solve_cell(cfg.coefficients);
  const double s = st.s.value_or(default_sobolev_index(LimitRule::Thm1, cfg.noise.alpha, cfg.noise.eta));
  const int M = common_mode_cutoff(st);
  if (M < st.mode_cutoff)
    r.notes.push_back("mode cutoff reduced to " + std::to_string(M) + " so that eps |m| < 1/2 at every eps");
  std::vector<int> watch;
  for (int m = -M; m <= M; ++m) watch.push_back(m);

  r.put("mu", cell.mu);
  r.put("s", s);
  r.put("M", M);
  r.put("T", cfg.horizon(cell.mu));
  r.put("paths", st.paths);

  Table rows{"errors",
             {"eps", "cells", "cutoff", "modes", "dt", "error", "se", "error_coarse_grid", "error_low_modes",
              "tail_bound"},
             {}};
  std::vector<double> eps, err, se;
  for (int cells : st.cells) {
    const CellRatio ratio(cells);
    const NoiseSpec spec = cfg.noise.build(ratio, cell.rho);
    if (st.validate_noise) require_validator(validate_assumption2(spec, st.validation_k), "assumption 2");
    SolverConfig sc = cfg.solver_at(ratio, cell.mu);
    sc.watch = watch;
    const PathSimulator sim(cfg.coefficients, spec, sc);
    LimitDrive drive{cell.mu, {}};
    for (int m : watch) drive.coefficient.push_back(coeff_thm1(spec, cell.rho, m));

    std::vector<double> full(st.paths), coarse(st.paths), low(st.paths);
    parallel_for(st.paths, st.threads, [&](int p) {
      const auto [ue, u] = sim.run_coupled(static_cast<std::uint64_t>(p), drive);
      full[p] = hminus_error_functional(ue, u, s, M);
      coarse[p] = hminus_error_functional(subsample(ue, 2), subsample(u, 2), s, M);
      low[p] = M > 0 ? hminus_error_functional(ue, u, s, M - 1) : full[p];
    });
    const MeanSE e = batch_means(full, st.batches);
    const MeanSE ec = batch_means(coarse, st.batches);
    const MeanSE el = batch_means(low, st.batches);
    const double tail = tail_bound(spec, cell.rho, cell.mu, sc.horizon, s, M, sc.cutoff);
    rows.add({ratio.eps(), double(cells), double(sc.cutoff), double(sim.op().modes), sc.step(), e.mean, e.se, ec.mean,
              el.mean, tail});
    eps.push_back(ratio.eps());
    err.push_back(e.mean);
    se.push_back(e.se);
    say(progress, eps_label(cells) + " error " + format_double(e.mean) + " +- " + format_double(e.se));
  }
  r.tables.push_back(std::move(rows));

  const bool degenerate = std::all_of(err.begin(), err.end(), [](double e) { return e == 0.0; });
  if (degenerate) {
    r.notes.push_back("all errors are zero; fit skipped");
    return r;
  }
  int significant = 0;
  for (std::size_t i = 1; i < err.size(); ++i)
    if (err[i - 1] - err[i] > st.tol.se_multiple * std::hypot(se[i - 1], se[i])) ++significant;
  r.put("significant_decreases", significant);
  r.verdicts.push_back(Verdict::check("error_monotonicity_violations", violations(err), "<=", 0.0));
  try {
    const RateFit fit = fit_power_law(eps, err, true);
    record_fit(r, fit, "");
    r.verdicts.push_back(Verdict::check("rate", fit.rate, ">=", st.tol.min_rate));
    r.verdicts.push_back(Verdict::check("fit_r_squared", fit.line.r_squared, ">=", st.tol.min_r_squared));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::FitFailed) throw;
    r.notes.push_back(std::string("fit skipped: ") + e.what());
  }
  return r;
}

ExperimentReport run_variance_study(const ExperimentConfig& cfg, LimitRule target, const Progress& progress) {
  const StudyConfig& st = cfg.study;
  ExperimentReport r = start(cfg, "variance-" + to_string(target));
  const CellSolution cell = solve_cell(cfg.coefficients);
  const double T = cfg.horizon(cell.mu);
  r.put("mu", cell.mu);
  r.put("T", T);
  r.put("rho_norm_sq", std::pow(l2_norm(cell.rho), 2));

  Table rows{"variance",
             {"eps", "cells", "cutoff", "m", "variance", "scaled_variance", "target", "relative_gap", "classical_target",
              "ratio_to_classical"},
             {}};
  std::vector<std::vector<double>> gaps(st.watch.size());
  std::vector<double> last_ratio(st.watch.size(), 0.0);
  for (int cells : st.cells) {
    const CellRatio ratio(cells);
    const NoiseSpec spec = cfg.noise.build(ratio, cell.rho);
    if (st.validate_noise) {
      switch (target) {
        case LimitRule::Thm1: require_validator(validate_assumption2(spec, st.validation_k), "assumption 2"); break;
        case LimitRule::Thm2: require_validator(validate_assumption3(spec, st.validation_k), "assumption 3"); break;
        default: require_validator(validate_assumption4(spec, st.validation_k), "assumption 4"); break;
      }
    }
    SolverConfig sc = cfg.solver_at(ratio, cell.mu);
    sc.watch = st.watch;
    const CovarianceTable cov = exact_mode_covariance(cfg.coefficients, spec, sc, {T});
    const double scale = target == LimitRule::Thm2 ? std::pow(ratio.eps(), -2.0 * spec.alpha) : 1.0;
    for (std::size_t i = 0; i < st.watch.size(); ++i) {
      const int m = st.watch[i];
      if (m == 0) throw Error(ErrorCode::ZeroMode, "variance studies exclude the Brownian mode m = 0");
      double c = 0.0;
      switch (target) {
        case LimitRule::Thm1: c = std::abs(coeff_thm1(spec, cell.rho, m)); break;
        case LimitRule::Thm2: c = coeff_thm2(spec, cell.rho); break;
        case LimitRule::Thm3: c = coeff_thm3(spec, cell.rho, m); break;
        case LimitRule::Corollary: c = coeff_corollary(spec, cell.rho, m); break;
      }
      const double finite = -std::expm1(-2.0 * cell.mu * m * m * T) / (2.0 * cell.mu * m * m);
      const double want = c * c * finite;
      const double classical = std::norm(coeff_thm1(spec, cell.rho, m)) * finite;
      const double v = cov.variance[i][0];
      const double gap = want > 0.0 ? (scale * v - want) / want : scale * v;
      const double ratio_classical = classical > 0.0 ? v / classical : 0.0;
      rows.add({ratio.eps(), double(cells), double(sc.cutoff), double(m), v, scale * v, want, gap, classical,
                ratio_classical});
      gaps[i].push_back(std::abs(gap));
      last_ratio[i] = ratio_classical;
      say(progress, eps_label(cells) + " m=" + std::to_string(m) + " gap " + format_double(gap));
    }
  }
  r.tables.push_back(std::move(rows));
  for (std::size_t i = 0; i < st.watch.size(); ++i) {
    const std::string tag = "_m" + std::to_string(st.watch[i]);
    r.put("final_gap" + tag, gaps[i].back());
    r.put("ratio_to_classical" + tag, last_ratio[i]);
    if (st.cells.size() > 1)
      r.verdicts.push_back(Verdict::check("gap_monotonicity_violations" + tag, violations(gaps[i]), "<=", 0.0));
    r.verdicts.push_back(Verdict::check("final_gap" + tag, gaps[i].back(), "<=", st.tol.max_final_gap));
    if (st.tol.min_enhancement > 0.0)
      r.verdicts.push_back(Verdict::check("ratio_to_classical" + tag, last_ratio[i], ">=", st.tol.min_enhancement));
  }
  return r;
}

ExperimentReport run_semigroup_study(const ExperimentConfig& cfg, const Progress& progress) {
  const StudyConfig& st = cfg.study;
  require_eps_points(st);
  ExperimentReport r = start(cfg, "semigroup");
  const CellSolution cell = solve_cell(cfg.coefficients);
  const double T = cfg.horizon(cell.mu);
  const int m = st.watch.front();
  const int hw = st.half_width;
  r.put("mu", cell.mu);
  r.put("omega", cell.omega);
  r.put("T", T);
  r.put("m", m);

  Table rows{"remainder", {"eps", "cells", "dt", "sup_remainder", "boundary_layer_initial", "boundary_layer_rate",
                           "boundary_layer_r_squared", "rate_over_omega"}, {}};
  Table trace{"remainder_trace", {"eps", "t", "remainder", "boundary_layer"}, {}};
  std::vector<double> eps, sup;
  double worst_rate_error = 0.0;
  bool have_layer = false;
  for (int cells : st.cells) {
    const CellRatio ratio(cells);
    if (cells > 1 && 2 * std::abs(m) >= cells) throw Error(ErrorCode::InvalidConfig, "requires eps |m| < 1/2");
    const double e2 = ratio.eps() * ratio.eps();
    const auto w = class_window(m, ratio, hw);
    const auto w0 = class_window(0, ratio, hw);
    const CMatrix a = generator_block(cfg.coefficients, ratio, w).adjoint();
    const CMatrix a0 = generator_block(cfg.coefficients, ratio, w0).adjoint();
    const double dt_rule = cfg.solver.dt > 0.0 ? cfg.solver.dt : std::min(1e-3, 0.1 * e2);
    const long steps = static_cast<long>(std::ceil(T / dt_rule - 1e-9));
    const double h = T / steps;
    const CMatrix p = exponential_propagator(a, h);
    const CMatrix p0 = exponential_propagator(a0, h);

    // f = S*(t) e_m; the slow part rho^eps e_m e^{-mu m^2 t} and the boundary
    // layer (S*(t)(1 - rho^eps)) e_m live on the same class window.
    CVector f = CVector::Zero(w.size()), slow(w.size()), layer(w.size());
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      const int j = (w[i] - m) / cells;
      slow[i] = cell.rho[j];
      layer[i] = (j == 0 ? 1.0 : 0.0) - cell.rho[j];
      if (j == 0) f[i] = 1.0;
    }
    const double layer0 = layer.norm();
    const long trace_every = std::max(1L, steps / 100);
    double s = 0.0;
    for (long n = 0; n <= steps; ++n) {
      const double t = n * h;
      const double rem = (f - slow * std::exp(-cell.mu * m * m * t) - layer).norm();
      s = std::max(s, rem);
      if (n % trace_every == 0 || n == steps) trace.add({ratio.eps(), t, rem, layer.norm()});
      f = p * f;
      layer = p0 * layer;
    }

    // Boundary-layer decay on the fast clock tau = t / eps^2.
    double rate = 0.0, r2 = 0.0;
    if (layer0 > 1e-13) {
      const double dtau = 0.05;
      const CMatrix q0 = exponential_propagator(a0, dtau * e2);
      CVector g(w0.size());
      for (int i = 0; i < static_cast<int>(w0.size()); ++i) {
        const int j = w0[i] / cells;
        g[i] = (j == 0 ? 1.0 : 0.0) - cell.rho[j];
      }
      std::vector<double> tau, y;
      for (int n = 0; n < 20000; ++n) {
        const double rel = g.norm() / layer0;
        if (rel <= 1e-3 && rel >= 1e-11) {
          tau.push_back(n * dtau);
          y.push_back(rel);
        }
        if (rel < 1e-11) break;
        g = q0 * g;
      }
      const DecayFit fit = fit_exponential_decay(tau, y, 0.0, 1e300);
      rate = fit.rate;
      r2 = fit.r_squared;
      worst_rate_error = std::max(worst_rate_error, std::abs(rate / cell.omega - 1.0));
      have_layer = true;
    }
    rows.add({ratio.eps(), double(cells), h, s, layer0, rate, r2, cell.omega > 0.0 ? rate / cell.omega : 0.0});
    eps.push_back(ratio.eps());
    sup.push_back(s);
    say(progress, eps_label(cells) + " sup remainder " + format_double(s));
  }
  r.tables.push_back(std::move(rows));
  r.tables.push_back(std::move(trace));

  const double floor = 1e-12;
  if (std::all_of(sup.begin(), sup.end(), [&](double v) { return v < floor; })) {
    r.put("max_remainder", *std::max_element(sup.begin(), sup.end()));
    r.notes.push_back("remainder at the discretisation floor; fit skipped");
  } else {
    const RateFit fit = fit_power_law(eps, sup, true);
    record_fit(r, fit, "");
    r.verdicts.push_back(Verdict::check("rate_low", fit.rate, ">=", st.tol.rate_low));
    r.verdicts.push_back(Verdict::check("rate_high", fit.rate, "<=", st.tol.rate_high));
  }
  if (have_layer) {
    r.put("boundary_layer_rate_error", worst_rate_error);
    r.verdicts.push_back(
        Verdict::check("boundary_layer_rate_error", worst_rate_error, "<=", st.tol.decay_rate_tolerance));
  } else {
    r.notes.push_back("rho is constant so the boundary layer vanishes");
  }
  return r;
}

ExperimentReport run_noise_check(const ExperimentConfig& cfg) {
  ExperimentReport r = start(cfg, "noise-check");
  const auto add_checks = [&](const std::vector<Check>& checks, const std::string& prefix) {
    for (const auto& ch : checks) r.verdicts.push_back({prefix + ch.name, ch.measured, "validator", ch.threshold, ch.passed});
  };
  add_checks(validate_assumption1(cfg.coefficients).checks, "assumption1_");
  const CellSolution cell = solve_cell(cfg.coefficients);
  const CellRatio ratio(cfg.study.cells.front());
  const NoiseSpec spec = cfg.noise.build(ratio, cell.rho);
  const int k = cfg.study.validation_k;
  const std::pair<const char*, AssumptionReport> reps[] = {{"assumption2", validate_assumption2(spec, k)},
                                                           {"assumption3", validate_assumption3(spec, k)},
                                                           {"assumption4", validate_assumption4(spec, k)}};
  for (const auto& [name, rep] : reps) {
    add_checks(rep.checks, std::string(name) + "_");
    Table t{name, {"k", "value"}, {}};
    for (std::size_t i = 0; i < rep.k.size(); ++i) t.add({double(rep.k[i]), rep.series[i]});
    r.tables.push_back(std::move(t));
    r.put(std::string(name) + "_passed", rep.passed() ? 1.0 : 0.0);
  }
  r.put("mu", cell.mu);
  r.put("omega", cell.omega);
  return r;
}

ExperimentReport run_simulation(const ExperimentConfig& cfg, const Progress& progress) {
  const StudyConfig& st = cfg.study;
  ExperimentReport r = start(cfg, "simulate");
  const CellSolution cell = solve_cell(cfg.coefficients);
  const CellRatio ratio(st.cells.front());
  const NoiseSpec spec = cfg.noise.build(ratio, cell.rho);
  SolverConfig sc = cfg.solver_at(ratio, cell.mu);
  sc.watch = st.watch;
  const PathSimulator sim(cfg.coefficients, spec, sc);
  std::vector<PathOutput> out(st.paths);
  parallel_for(st.paths, st.threads, [&](int p) { out[p] = sim.run(static_cast<std::uint64_t>(p)); });
  for (int p = 0; p < st.paths; ++p) r.tables.push_back(trajectory_table(out[p], "path_" + std::to_string(p)));
  r.put("eps", ratio.eps());
  r.put("modes", sim.op().modes);
  r.put("dt", sc.step());
  r.put("mu", cell.mu);
  say(progress, "simulated " + std::to_string(st.paths) + " paths at " + eps_label(ratio.cells()));
  return r;
}

ExperimentReport run_study(const ExperimentConfig& cfg, const Progress& progress) {
  const std::string& kind = cfg.study.kind;
  if (kind == "converge") return run_thm1_convergence(cfg, progress);
  if (kind == "variance") return run_variance_study(cfg, cfg.study.target, progress);
  if (kind == "semigroup") return run_semigroup_study(cfg, progress);
  if (kind == "noise-check") return run_noise_check(cfg);
  if (kind == "simulate") return run_simulation(cfg, progress);
  throw Error(ErrorCode::InvalidConfig, "unknown study kind '" + kind + "'");
}

}  // namespace homlab
