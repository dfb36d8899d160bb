#pragma once

// Declarative experiment configuration (JSON) with sections coefficients,
// noise, solver and study.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homlab/block_operator.hpp"
#include "homlab/cell_problem.hpp"
#include "homlab/limit_solver.hpp"
#include "homlab/noise_model.hpp"

namespace homlab {

/// A real trigonometric polynomial from JSON: a number (constant), an object
/// {"mean": a0, "cos": [a1, ...], "sin": [b1, ...]}, or a list of explicit
/// coefficients [[k, re], [k, re, im], ...].
SpectralField field_from_json(const nlohmann::json& j);
nlohmann::json field_to_json(const SpectralField& f);

/// "heat", "cosine-potential A=0.5", or an object with "kind".
Coefficients coefficients_from_json(const nlohmann::json& j);

struct NoiseConfig {
  NoiseFamily family = NoiseFamily::ConstantWhite;
  int cutoff = 32;
  /// When positive, the cutoff at eps is max(cutoff, cutoff_per_cell / eps).
  int cutoff_per_cell = 0;
  double alpha = 0.0;
  double tau = 1.0;
  double eta = 0.0;
  double amplitude = 1.0;
  /// Subtract <p, rho> from the base profile (power-decay only).
  bool centered = false;
  SpectralField base = SpectralField::constant(16, 1.0);
  SpectralField perturbation = SpectralField(16);
  SpectralField tail = SpectralField::constant(16, 1.0);
  std::vector<SpectralField> table;
  std::optional<Mollifier> mollifier;

  int cutoff_at(CellRatio ratio) const;
  NoiseSpec build(CellRatio ratio, const SpectralField& rho) const;
};

NoiseConfig noise_config_from_json(const nlohmann::json& j);

struct Tolerances {
  double min_rate = 0.3;
  double min_r_squared = 0.9;
  double max_final_gap = 0.1;
  double rate_low = 0.8;
  double rate_high = 1.2;
  double decay_rate_tolerance = 0.1;
  /// Decreases between consecutive eps count as significant beyond this many SE.
  double se_multiple = 2.0;
  /// thm3 only: required ratio of the final variance to the classical one (0 = off).
  double min_enhancement = 0.0;
};

struct StudyConfig {
  /// converge | variance | semigroup | noise-check | simulate
  std::string kind = "converge";
  LimitRule target = LimitRule::Thm3;
  /// Reciprocals 1/eps, strictly increasing.
  std::vector<int> cells{4, 8, 16, 32};
  /// Sobolev index of the error norm; the per-target default when unset.
  std::optional<double> s;
  int mode_cutoff = 8;
  double horizon = 1.0;
  /// When positive the horizon is this multiple of 1/mu.
  double horizon_over_mu = 0.0;
  int paths = 200;
  int batches = 10;
  std::vector<int> watch{1};
  int threads = 0;
  int half_width = 24;
  int validation_k = 1024;
  bool validate_noise = true;
  Tolerances tol;
};

struct ExperimentConfig {
  nlohmann::json document;
  Coefficients coefficients = Coefficients::heat(1.0);
  NoiseConfig noise;
  /// Template for the per-eps solver settings (ratio, horizon and cutoff are set per run).
  SolverConfig solver;
  StudyConfig study;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Re-parses the document after editing it (used by CLI overrides).
  void set(const std::string& section, const std::string& key, const nlohmann::json& value);
  /// FNV-1a of the canonical document without the output location.
  std::string hash() const;
  double horizon(double mu) const;
  SolverConfig solver_at(CellRatio ratio, double mu) const;
};

}  // namespace homlab
