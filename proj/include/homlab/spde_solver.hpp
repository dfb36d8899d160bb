#pragma once

// Path simulation of du = L_eps u dt + sum_k q_k(x/eps) e_k dW_k from u = 0,
// the coupled limit dynamics, and exact second moments per residue class.

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "homlab/block_operator.hpp"
#include "homlab/cell_problem.hpp"
#include "homlab/noise_model.hpp"

namespace homlab {

struct PathOutput {
  std::vector<double> times;
  std::vector<int> watch;
  /// modes[i][n] = <u(t_n), e_{watch[i]}>
  std::vector<std::vector<cplx>> modes;
  /// ||u(t_n)||^2 when requested.
  std::vector<double> energy;
  std::uint64_t seed = 0;
  std::uint64_t path = 0;

  const std::vector<cplx>& mode(int m) const;
};

/// Per-mode parameters of the limit OU dynamics x' = -mu m^2 x dt + c_m dW_m.
struct LimitDrive {
  double mu = 0.0;
  std::vector<cplx> coefficient;  // aligned with SolverConfig::watch
};

/// Precomputes per-class propagators once; run() is const and thread safe.
class PathSimulator {
 public:
  PathSimulator(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config);
  ~PathSimulator();
  PathSimulator(PathSimulator&&) noexcept;

  PathOutput run(std::uint64_t path) const;
  /// Runs the multiscale system and, on the same increments, the limit modes
  /// by exponential Euler x <- e^{-mu m^2 dt}(x + c_m dW_m).
  std::pair<PathOutput, PathOutput> run_coupled(std::uint64_t path, const LimitDrive& limit) const;

  const BlockOperator& op() const;
  const SolverConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

PathOutput simulate_path(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config,
                         std::uint64_t path_index);

/// u_eps and the thm1 limit driven by the same increments.
std::pair<PathOutput, PathOutput> simulate_coupled(const Coefficients& c, const NoiseSpec& spec,
                                                   const SolverConfig& config, std::uint64_t path_index = 0);

struct CovarianceTable {
  std::vector<double> times;
  std::vector<int> watch;
  /// variance[i][n] = E|<u(t_n), e_{watch[i]}>|^2
  std::vector<std::vector<double>> variance;
};

struct CovarianceOptions {
  /// Skip the eigenbasis closed form and iterate the vectorised trapezoid
  /// recursion by repeated squaring (used automatically when the
  /// eigenvector basis is ill conditioned).
  bool force_direct = false;
  double max_condition = 1e8;
};

/// Trapezoid-rule solution of S' = A S + S A^H + G G^H, S(0) = 0, per class
/// (step = config.step(), shortened per time so each t is hit exactly).
CovarianceTable exact_mode_covariance(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config,
                                      const std::vector<double>& t_grid, const CovarianceOptions& opt = {});

}  // namespace homlab
