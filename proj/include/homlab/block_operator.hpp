#pragma once

// L_eps and Q_eps restricted to residue classes modulo 1/eps. Wavenumbers
// w and w' interact only when w - w' is a multiple of 1/eps, so the operator
// on [-N/2, N/2) splits into 1/eps independent dense blocks.

#include <cstdint>
#include <string>
#include <vector>

#include "homlab/cell_problem.hpp"
#include "homlab/fourier.hpp"
#include "homlab/linalg.hpp"
#include "homlab/noise_model.hpp"

namespace homlab {

enum class Scheme { ImexCn, BlockExponential };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct SolverConfig {
  CellRatio ratio{1};
  /// Total modes N; 0 selects the smallest admissible multiple of 1/eps.
  int modes = 0;
  /// 0 selects 1e-3 min(1, 16 eps^2).
  double dt = 0.0;
  double horizon = 1.0;
  /// Driven wavenumbers |k| <= cutoff.
  int cutoff = 32;
  std::vector<int> watch{1};
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::BlockExponential;
  /// Record every n-th step.
  int record_stride = 1;
  bool record_energy = false;
  /// Simulate every residue class instead of deriving conjugate ones.
  bool all_classes = false;
  /// Extra harmonics of headroom per class when modes = 0.
  int pad = 2;

  double default_dt() const;
  /// Number of steps and the step length that lands exactly on the horizon.
  long steps() const;
  double step() const;
};

/// 2 (1/eps)(J + 1) + 2K, the smallest admissible N.
int minimum_modes(const Coefficients& c, const SolverConfig& config);
/// config.modes, or the automatic choice. Throws ResolutionTooSmall /
/// InvalidConfig when the configuration violates its invariants.
int resolve_modes(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config);
void validate(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config);

/// (1/eps) b(x/eps) u' + (1/2) sigma^2(x/eps) u'' on u's resolution, with
/// dealiased products. ResolutionTooSmall when u.size() < 2 (1/eps)(J + 1).
SpectralField apply_generator(const Coefficients& c, CellRatio ratio, const SpectralField& u);

struct ClassBlock {
  int residue = 0;
  std::vector<int> wavenumbers;
  /// <L_eps e_{w_j}, e_{w_i}>
  CMatrix a;
  /// Driven k in this class and their columns phi(eps k) <q_k(./eps) e_k, e_{w_i}>.
  std::vector<int> forced;
  CMatrix noise;

  int position(int w) const;
};

struct BlockOperator {
  CellRatio ratio{1};
  int modes = 0;
  std::vector<ClassBlock> blocks;

  int residue_of(int w) const { return ((w % ratio.cells()) + ratio.cells()) % ratio.cells(); }
  /// Block for a residue; throws InvalidConfig when it was not built.
  const ClassBlock& block(int residue) const;
  /// Assembled N x N operator on wavenumbers -N/2 .. N/2 - 1.
  CMatrix dense() const;
};

/// Blocks for the listed residues (all of them when empty).
BlockOperator build_blocks(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config,
                           const std::vector<int>& residues = {});

}  // namespace homlab
