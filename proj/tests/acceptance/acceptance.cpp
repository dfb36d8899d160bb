// Acceptance suite: one PASS/FAIL line per criterion. With arguments, runs
// only the listed criteria (used by ctest, one entry per criterion).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "homlab/errors.hpp"
#include "homlab/experiments.hpp"
#include "homlab/kernels.hpp"

using namespace homlab;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::filesystem::path kSource = HOMLAB_SOURCE_DIR;

// ---- 1: cell problem closed forms ----------------------------------------

Outcome cell_closed_forms() {
  const auto t0 = std::chrono::steady_clock::now();
  const CellSolution cell = solve_cell(Coefficients::cosine_potential(1.0));
  const double elapsed = seconds_since(t0);
  // e^{-2 cos x} = sum_k (-1)^k I_k(2) e^{ikx}
  const double i0 = std::cyl_bessel_i(0.0, 2.0);
  double err2 = 0.0;
  for (int k = -40; k <= 40; ++k) {
    const double exact = (k % 2 ? -1.0 : 1.0) * std::cyl_bessel_i(double(std::abs(k)), 2.0) / i0;
    err2 += std::norm(cell.rho[k] - exact);
  }
  const double rho_err = std::sqrt(err2);
  const double mu_exact = 1.0 / (2.0 * i0 * i0);
  const double mu_err = std::abs(cell.mu - mu_exact);
  Outcome o;
  o.pass = rho_err <= 1e-8 && mu_err <= 1e-6 && elapsed < 1.0;
  o.detail = "||rho - e^{-2cos x}/I0(2)|| = " + fmt("%.2e", rho_err) + ", |mu - 1/(2 I0(2)^2)| = " +
             fmt("%.2e", mu_err) + " (mu = " + fmt("%.7f", cell.mu) + "), " + fmt("%.3f", elapsed) + " s";
  o.info.push_back("quadrature check: mu oracle " + fmt("%.7f", oracle::cosine_mu()));
  return o;
}

// ---- 2: mu cross-validation ----------------------------------------------

Outcome mu_cross_validation() {
  const auto c = Coefficients::cosine_potential(1.0);
  const CellSolution cell = solve_cell(c);
  const CellRatio ratio(16);
  const auto d1 = mu_decay_oracle(c, cell.rho, ratio, 1);
  const auto d2 = mu_decay_oracle(c, cell.rho, ratio, 2);
  const double e1 = std::abs(d1.mu_hat - cell.mu) / cell.mu;
  const double e2 = std::abs(d2.mu_hat - cell.mu) / cell.mu;
  const double scaling = std::abs(d2.rate / d1.rate / 4.0 - 1.0);
  Outcome o;
  o.pass = e1 <= 0.02 && e2 <= 0.02 && scaling <= 0.02;
  o.detail = "eps = 1/16: m=1 off by " + fmt("%.2f%%", 100 * e1) + ", m=2 off by " + fmt("%.2f%%", 100 * e2) +
             ", rate ratio / 4 off by " + fmt("%.2f%%", 100 * scaling) + " (limit 2%)";
  const auto f2 = mu_decay_oracle(c, cell.rho, CellRatio(32), 2);
  o.info.push_back("m=2 at eps = 1/32 (same eps*m as m=1 at 1/16): off by " +
                   fmt("%.2f%%", 100 * std::abs(f2.mu_hat - cell.mu) / cell.mu) +
                   "; the slow rate depends on eps*m, so m=2 at eps=1/16 carries the eps*m = 1/8 offset");
  return o;
}

// ---- 3: white-noise enhancement ------------------------------------------

ExperimentReport white_noise_study(int cutoff) {
  json j = json::parse(R"({
    "coefficients": {"kind": "cosine-potential", "A": 1.0, "sigma": 1.0},
    "noise": {"family": "constant-white"},
    "study": {"kind": "variance", "target": "thm3", "eps": [0.25, 0.125, 0.0625], "T_over_mu": 3.0, "watch": [1],
              "tolerances": {"max_final_gap": 0.1, "min_enhancement": 1.96}}
  })");
  j["noise"]["cutoff"] = cutoff;
  return run_variance_study(ExperimentConfig::from_json(j), LimitRule::Thm3);
}

std::string gap_list(const ExperimentReport& r) {
  std::string s;
  for (const auto& row : r.table("variance")->rows) s += (s.empty() ? "" : ", ") + fmt("%.2f%%", 100 * std::abs(row[7]));
  return s;
}

Outcome white_noise_enhancement() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = white_noise_study(32);
  const double rho2 = r.value("rho_norm_sq");
  const double ratio = r.value("ratio_to_classical_m1");
  const bool monotone = r.verdict("gap_monotonicity_violations_m1")->passed;
  const double final_gap = r.value("final_gap_m1");
  Outcome o;
  o.pass = monotone && final_gap <= 0.1 && ratio >= 0.9 * rho2;
  o.detail = "K = 32, |gap| over eps = 1/4, 1/8, 1/16: " + gap_list(r) + (monotone ? " (monotone)" : " (NOT monotone)") +
             "; ratio to classical " + fmt("%.3f", ratio) + " vs 0.9||rho||^2 = " + fmt("%.3f", 0.9 * rho2) + ", " +
             fmt("%.2f", seconds_since(t0)) + " s";
  const auto wide = white_noise_study(64);
  o.info.push_back("K = 64: |gap| " + gap_list(wide) +
                   "; with K = 32 the eps = 1/16 classes keep only |l| <= 2 fast harmonics of the noise");
  return o;
}

// ---- 4: pathwise convergence ---------------------------------------------

Outcome pathwise_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = ExperimentConfig::load(kSource / "configs" / "thm1_convergence.json");
  const auto r = run_thm1_convergence(cfg);
  std::string errs;
  for (const auto& row : r.table("errors")->rows) errs += (errs.empty() ? "" : ", ") + fmt("%.4g", row[5]);
  const double rate = r.value("rate");
  const double r2 = r.value("r_squared");
  const bool monotone = r.verdict("error_monotonicity_violations")->passed;
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = monotone && rate >= 0.3 && r2 >= 0.9 && elapsed <= 900.0;
  o.detail = "errors " + errs + (monotone ? " (strictly decreasing)" : " (NOT decreasing)") + ", theta = " +
             fmt("%.3f", rate) + ", R^2 = " + fmt("%.4f", r2) + ", " + fmt("%.1f", elapsed) + " s";
  if (r.value("excluded_largest_eps") > 0) o.info.push_back("rate fit excluded eps = 1/4 as pre-asymptotic");
  return o;
}

// ---- 5: scaled variance --------------------------------------------------

Outcome scaled_variance() {
  const auto cfg = ExperimentConfig::load(kSource / "configs" / "thm2_centered.json");
  const auto r = run_variance_study(cfg, LimitRule::Thm2);
  const bool monotone = r.verdict("gap_monotonicity_violations_m1")->passed;
  const double final_gap = r.value("final_gap_m1");
  Outcome o;
  o.pass = monotone && final_gap <= 0.15;
  o.detail = "alpha = 1/2 centered family, |gap| over eps = 1/4, 1/8, 1/16: " + gap_list(r) +
             (monotone ? " (monotone)" : " (NOT monotone)") + ", final " + fmt("%.2f%%", 100 * final_gap);
  return o;
}

// ---- 6: Lambda-series convergence ----------------------------------------

Outcome lambda_convergence() {
  const auto c = Coefficients::cosine_potential(1.0);
  const CellSolution cell = solve_cell(c);
  const auto spec = NoiseSpec::constant_white(1024);
  const double target = coeff_thm3(spec, cell.rho, 1);
  std::vector<double> diff;
  double worst_tail = 0.0;
  std::string list;
  for (int cells : {4, 8, 16, 32}) {
    const auto s = lambda_series(spec, cell.rho, CellRatio(cells), 1, LambdaScale::None, false);
    diff.push_back(std::abs(s.lambda - target));
    worst_tail = std::max(worst_tail, s.tail / s.lambda);
    list += (list.empty() ? "" : ", ") + fmt("%.2e", diff.back());
  }
  // A zero difference followed by a zero difference is no decrease at all.
  double worst_factor = INFINITY;
  for (std::size_t i = 1; i < diff.size(); ++i) {
    const double f = diff[i - 1] == 0.0 ? 0.0 : diff[i - 1] / diff[i];
    worst_factor = std::min(worst_factor, f);
  }
  Outcome o;
  o.pass = worst_factor >= 1.5 && worst_tail < 0.01;
  o.detail = "q_k = 1, K = 1024: |Lambda - coeff| over eps = 1/4..1/32: " + list + "; smallest halving factor " +
             fmt("%.3g", worst_factor) + ", tail/Lambda <= " + fmt("%.1e", worst_tail);
  o.info.push_back("for q_k = 1, lambda^l = conj(rho_l) does not depend on eps, so Lambda equals coeff_thm3 up to "
                   "truncation and rounding");
  {
    const auto narrow = NoiseSpec::constant_white(32);
    std::string k32;
    for (int cells : {4, 8, 16, 32}) {
      const auto s = lambda_series(narrow, cell.rho, CellRatio(cells), 1, LambdaScale::None, false);
      k32 += (k32.empty() ? "" : ", ") + fmt("%.2e", std::abs(s.lambda - target));
    }
    o.info.push_back("K = 32: |Lambda - coeff| " + k32 + " (truncation grows as eps shrinks)");
  }
  // A family where Lambda genuinely moves with eps.
  const auto tail = NoiseSpec::tail_convergent(1024, 1.0, SpectralField::constant(4, 1.0),
                                               SpectralField::from_modes(4, {{1, 0.5}, {-1, 0.5}}));
  const double t2 = coeff_thm3(tail, cell.rho, 1);
  std::string alt;
  for (int cells : {4, 8, 16, 32}) {
    const auto s = lambda_series(tail, cell.rho, CellRatio(cells), 1, LambdaScale::None, false);
    alt += (alt.empty() ? "" : ", ") + fmt("%.2e", std::abs(s.lambda - t2));
  }
  o.info.push_back("tail-convergent q_k = 1 + |k|^{-1} cos x: |Lambda - coeff| " + alt);
  return o;
}

// ---- 7: remainder scaling ------------------------------------------------

Outcome remainder_scaling() {
  const auto cfg = ExperimentConfig::load(kSource / "configs" / "semigroup.json");
  const auto r = run_semigroup_study(cfg);
  const double rate = r.value("rate");
  const double bl = r.value("boundary_layer_rate_error");
  Outcome o;
  o.pass = rate >= 0.8 && rate <= 1.2 && bl <= 0.1;
  std::string sups;
  for (const auto& row : r.table("remainder")->rows) sups += (sups.empty() ? "" : ", ") + fmt("%.4g", row[3]);
  o.detail = "sup ||R|| over eps = 1/8, 1/16, 1/32: " + sups + ", exponent " + fmt("%.3f", rate) +
             "; boundary-layer rate vs omega/eps^2 off by " + fmt("%.2e", bl) + " (omega = " +
             fmt("%.6f", r.value("omega")) + ")";
  return o;
}

// ---- 8: invariant suites -------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome invariants() {
  std::vector<std::pair<std::string, bool>> checks;
  const auto c = Coefficients::cosine_potential(1.0);
  const CellSolution cell = solve_cell(c);

  // conjugate symmetry and realness
  {
    SolverConfig cfg;
    cfg.ratio = CellRatio(8);
    cfg.cutoff = 16;
    cfg.horizon = 0.05;
    cfg.watch = {1, -1, 3, -3};
    cfg.all_classes = true;
    const auto spec = NoiseSpec::power_decay(16, 0.75, SpectralField::from_modes(4, {{0, 1.0}, {1, 0.3}, {-1, 0.3}}));
    const auto p = simulate_path(c, spec, cfg, 5);
    double worst = 0.0;
    for (std::size_t n = 0; n < p.times.size(); ++n) {
      worst = std::max(worst, std::abs(p.modes[0][n] - std::conj(p.modes[1][n])));
      worst = std::max(worst, std::abs(p.modes[2][n] - std::conj(p.modes[3][n])));
    }
    const auto dw = sample_increments(16, 1e-3, CounterStream(3, 0), 0);
    const bool noise_real = assemble_noise(spec, CellRatio(8), dw, 256).is_real(1e-10);
    checks.push_back({"conjugate symmetry / realness", worst <= 1e-10 && noise_real && cell.rho.is_real(1e-10)});
  }
  // normalisation and ||rho|| >= 1
  checks.push_back({"<rho,1> = 1", std::abs(inner_product(cell.rho, SpectralField::constant(2, 1.0)) - 1.0) <= 1e-10});
  {
    const double flat = l2_norm(solve_cell(Coefficients::heat(std::sqrt(2.0))).rho);
    checks.push_back({"||rho|| >= 1, = 1 iff constant", l2_norm(cell.rho) > 1.0 + 1e-8 && std::abs(flat - 1.0) <= 1e-8});
  }
  // block solver against dense stepping at N = 64
  {
    const auto spec = NoiseSpec::power_decay(8, 0.75, SpectralField::from_modes(4, {{0, 1.0}, {1, 0.3}, {-1, 0.3}}));
    SolverConfig cfg;
    cfg.ratio = CellRatio(4);
    cfg.cutoff = 8;
    cfg.horizon = 0.1;
    cfg.watch = {1, -1};
    cfg.modes = 64;
    cfg.dt = 1e-3;
    cfg.seed = 77;
    const auto out = simulate_path(c, spec, cfg, 2);
    CMatrix a(64, 64);
    for (int j = -32; j < 32; ++j) {
      const auto col = apply_generator(c, cfg.ratio, SpectralField::mode(64, j));
      for (int i = -32; i < 32; ++i) a(i + 32, j + 32) = col[i];
    }
    const CMatrix p = exponential_propagator(a, cfg.step());
    const CounterStream stream(cfg.seed, 2);
    CVector u = CVector::Zero(64);
    double worst = 0.0;
    for (long step = 0; step < cfg.steps(); ++step) {
      const auto f = assemble_noise(spec, cfg.ratio, sample_increments(8, cfg.step(), stream, step), 64);
      CVector g(64);
      for (int k = -32; k < 32; ++k) g[k + 32] = f[k];
      u = p * (u + g);
      for (std::size_t i = 0; i < cfg.watch.size(); ++i)
        worst = std::max(worst, std::abs(u[cfg.watch[i] + 32] - out.modes[i][step + 1]));
    }
    checks.push_back({"block vs dense (N = 64)", worst <= 1e-8});
  }
  // Parseval
  {
    std::mt19937_64 gen(13);
    const auto f = oracle::random_field(64, 31, gen);
    const auto values = f.to_grid(64);
    double grid = 0.0, coeff = 0.0;
    for (auto v : values) grid += std::norm(v);
    for (auto v : f.coeffs()) coeff += std::norm(v);
    checks.push_back({"Parseval", std::abs(grid / 64 - coeff) <= 1e-12 * coeff});
  }
  // exact sampler: per-step variance recursion equals the Lyapunov solution
  {
    const auto model = LimitModel::constant(0.7, cplx(0.3, 1.1), 4);
    bool ok = true;
    for (int m : {1, 2, 3}) {
      double v = 0.0, prev = 0.0;
      const double rate = model.mu * m * m;
      for (double t : {0.01, 0.3, 0.31, 1.0, 2.5, 7.0}) {
        const double a2 = std::exp(-2.0 * rate * (t - prev));
        v = a2 * v + std::norm(model.coefficient(m)) * (1 - a2) / (2 * rate);
        prev = t;
        ok = ok && std::abs(v - ou_variance(model, m, t)) <= 1e-12 * ou_variance(model, m, t);
      }
    }
    checks.push_back({"exact-sampler variance identity", ok});
  }
  // reports reproduce bit for bit
  {
    const auto cfg = ExperimentConfig::load(kSource / "configs" / "demo.json");
    const auto dir = std::filesystem::temp_directory_path() / "homlab_acceptance";
    std::filesystem::remove_all(dir);
    emit_report(run_study(cfg), dir / "a");
    emit_report(run_study(cfg), dir / "b");
    bool same = true;
    for (const auto& e : std::filesystem::directory_iterator(dir / "a"))
      same = same && slurp(e.path()) == slurp(dir / "b" / e.path().filename());
    std::filesystem::remove_all(dir);
    checks.push_back({"bit-exact reports", same});
  }
  Outcome o;
  o.pass = true;
  for (const auto& [name, ok] : checks) {
    o.pass = o.pass && ok;
    o.detail += (o.detail.empty() ? "" : "; ") + name + (ok ? " ok" : " FAILED");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"cell problem closed forms", cell_closed_forms},
      {"mu cross-validation", mu_cross_validation},
      {"white-noise enhancement", white_noise_enhancement},
      {"pathwise convergence", pathwise_convergence},
      {"scaled variance", scaled_variance},
      {"Lambda-series convergence", lambda_convergence},
      {"remainder scaling", remainder_scaling},
      {"invariant suites", invariants},
  };
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) which.push_back(i);

  std::printf("kernels: %s\n", kernels::to_string(kernels::active_isa()).c_str());
  int failed = 0;
  for (int id : which) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::printf("criterion %d: unknown\n", id);
      ++failed;
      continue;
    }
    const auto& [name, run] = criteria[id - 1];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw ") + e.what();
    }
    std::printf("criterion %d [%s] %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    for (const auto& line : o.info) std::printf("    info: %s\n", line.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
