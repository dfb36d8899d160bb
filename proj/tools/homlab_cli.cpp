// homlab: command-line front end for the cell problem, noise validators,
// path simulation and the convergence studies.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "homlab/errors.hpp"
#include "homlab/experiments.hpp"
#include "homlab/kernels.hpp"

using namespace homlab;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> paths;
  std::optional<std::string> target;
  bool quiet = false;
};

ExperimentConfig load(const Options& o, const std::string& kind) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig::from_json(nlohmann::json::object())
                                          : ExperimentConfig::load(o.config);
  if (!kind.empty()) cfg.set("study", "kind", kind);
  if (o.seed) cfg.set("", "seed", *o.seed);
  if (o.paths) cfg.set("study", "paths", *o.paths);
  if (o.target) cfg.set("study", "target", *o.target);
  if (o.out) cfg.output = *o.out;
  return cfg;
}

ExperimentReport cell_report(const ExperimentConfig& cfg) {
  const CellSolution cell = solve_cell(cfg.coefficients);
  ExperimentReport r;
  r.study = "cell";
  r.config_hash = cfg.hash();
  r.seed = cfg.seed;
  r.put("mu", cell.mu);
  r.put("omega", cell.omega);
  r.put("omega_r_squared", cell.omega_r_squared);
  r.put("rho_norm_sq", std::pow(l2_norm(cell.rho), 2));
  r.put("rho_residual", cell.rho_residual);
  r.put("chi_residual", cell.chi_residual);
  Table rho{"rho", {"k", "re", "im"}, {}};
  for (int k = cell.rho.kmin(); k <= cell.rho.kmax(); ++k)
    if (std::abs(cell.rho[k]) > 1e-16) rho.add({double(k), cell.rho[k].real(), cell.rho[k].imag()});
  r.tables.push_back(std::move(rho));
  return r;
}

void print(const ExperimentReport& r, bool quiet) {
  if (quiet) return;
  std::cout << r.study << "  config " << r.config_hash << "  seed " << r.seed << "\n";
  for (const auto& [k, v] : r.summary) std::cout << "  " << k << " = " << format_double(v) << "\n";
  for (const auto& v : r.verdicts)
    std::cout << "  [" << (v.passed ? "pass" : "FAIL") << "] " << v.name << ": " << format_double(v.measured) << " "
              << v.relation << " " << format_double(v.tolerance) << "\n";
  for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver and studies for periodically homogenised stochastic heat equations"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "root seed of the random streams");
  app.add_option("--out", o.out, "output directory for report.json and CSV tables");
  app.add_option("--paths", o.paths, "Monte Carlo path count")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", o.quiet, "no console output");

  auto* cell = app.add_subcommand("cell", "invariant density, effective diffusivity and spectral gap");
  auto* noise = app.add_subcommand("noise-check", "run the noise assumption validators");
  auto* simulate = app.add_subcommand("simulate", "simulate paths and write (t, m, re, im) tables");
  auto* converge = app.add_subcommand("converge", "pathwise convergence to the homogenised limit");
  auto* variance = app.add_subcommand("variance", "second-moment convergence to a limit model");
  auto* semigroup = app.add_subcommand("semigroup", "semigroup remainder and boundary-layer scaling");
  variance->add_option("--target", o.target, "thm1, thm2, thm3 or corollary");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentReport report;
    ExperimentConfig cfg;
    const Progress progress = [&](const std::string& msg) {
      if (!o.quiet) std::cerr << msg << "\n";
    };
    if (cell->parsed()) {
      cfg = load(o, "");
      report = cell_report(cfg);
    } else {
      const std::string kind = noise->parsed()       ? "noise-check"
                               : simulate->parsed()  ? "simulate"
                               : converge->parsed()  ? "converge"
                               : variance->parsed()  ? "variance"
                                                     : "semigroup";
      (void)semigroup;
      cfg = load(o, kind);
      if (!o.quiet) std::cerr << "kernels: " << kernels::to_string(kernels::active_isa()) << "\n";
      report = run_study(cfg, progress);
    }
    print(report, o.quiet);
    if (o.out || !o.config.empty()) {
      const auto files = emit_report(report, cfg.output);
      if (!o.quiet) std::cout << "wrote " << files.size() << " files to " << cfg.output.string() << "\n";
    }
    return report.passed() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
