#include "homlab/block_operator.hpp"

#include <algorithm>
#include <cmath>

#include "homlab/errors.hpp"

namespace homlab {

std::string to_string(Scheme s) { return s == Scheme::ImexCn ? "imex-cn" : "block-exponential"; }

Scheme scheme_from_string(const std::string& name) {
  if (name == "imex-cn") return Scheme::ImexCn;
  if (name == "block-exponential") return Scheme::BlockExponential;
  throw Error(ErrorCode::InvalidConfig, "unknown scheme '" + name + "'");
}

double SolverConfig::default_dt() const {
  const double eps = ratio.eps();
  return 1e-3 * std::min(1.0, 16.0 * eps * eps);
}

long SolverConfig::steps() const {
  const double h = dt > 0.0 ? dt : default_dt();
  return std::max(1L, std::lround(std::ceil(horizon / h - 1e-9)));
}

double SolverConfig::step() const { return horizon / static_cast<double>(steps()); }

namespace {

int noise_band(const NoiseSpec& spec, int cutoff) {
  int band = 0;
  // profiles are band-limited and change shape at most through the table
  const int probe = spec.family == NoiseFamily::Custom ? std::min<int>(cutoff, static_cast<int>(spec.table.size()))
                                                       : std::min(cutoff, 1);
  for (int k = 0; k <= probe; ++k) band = std::max(band, spec.profile(k).bandwidth(1e-15));
  return band;
}

}  // namespace

int minimum_modes(const Coefficients& c, const SolverConfig& config) {
  return 2 * config.ratio.cells() * (c.max_harmonic() + 1) + 2 * config.cutoff;
}

int resolve_modes(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config) {
  const int n = config.ratio.cells();
  const int needed = minimum_modes(c, config);
  if (config.modes > 0) {
    if (config.modes < needed || config.modes % 2 != 0) {
      throw Error(ErrorCode::ResolutionTooSmall, "N = " + std::to_string(config.modes) + " but at least " +
                                                     std::to_string(needed) + " (even) is required");
    }
    return config.modes;
  }
  const int harmonics = std::max(c.max_harmonic(), noise_band(spec, config.cutoff));
  const int per_class = 2 * (harmonics + 1 + config.pad) + 2 * ((config.cutoff + n - 1) / n);
  return std::max(n * per_class, needed + needed % 2);
}

void validate(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config) {
  if (!(config.horizon > 0.0)) throw Error(ErrorCode::InvalidConfig, "horizon must be positive");
  if (config.dt < 0.0 || config.dt > config.horizon) throw Error(ErrorCode::InvalidConfig, "need 0 < dt <= T");
  if (config.cutoff < 0) throw Error(ErrorCode::InvalidConfig, "negative noise cutoff");
  if (config.record_stride < 1) throw Error(ErrorCode::InvalidConfig, "record stride must be >= 1");
  for (int m : config.watch) {
    if (2 * std::abs(m) >= config.ratio.cells() && config.ratio.cells() > 1) {
      throw Error(ErrorCode::InvalidConfig, "watched mode " + std::to_string(m) + " violates eps |m| < 1/2");
    }
  }
  resolve_modes(c, spec, config);
}

SpectralField apply_generator(const Coefficients& c, CellRatio ratio, const SpectralField& u) {
  const int n = u.size();
  const int cells = ratio.cells();
  if (n < 2 * cells * (c.max_harmonic() + 1)) {
    throw Error(ErrorCode::ResolutionTooSmall, "apply_generator needs N >= 2 (1/eps)(J + 1)");
  }
  const SpectralField b = oscillate(c.b.resized(2 * c.max_harmonic() + 2), ratio, 0, n);
  const SpectralField s = oscillate(c.sigma_squared().resized(2 * c.max_harmonic() + 2), ratio, 0, n);
  SpectralField out = multiply(b, u.derivative(1)) * cplx(cells);
  out += multiply(s, u.derivative(2)) * cplx(0.5);
  return out;
}

int ClassBlock::position(int w) const {
  const auto it = std::lower_bound(wavenumbers.begin(), wavenumbers.end(), w);
  if (it == wavenumbers.end() || *it != w) {
    throw Error(ErrorCode::InvalidConfig, "wavenumber " + std::to_string(w) + " is not in this class");
  }
  return static_cast<int>(it - wavenumbers.begin());
}

const ClassBlock& BlockOperator::block(int residue) const {
  for (const auto& b : blocks)
    if (b.residue == residue) return b;
  throw Error(ErrorCode::InvalidConfig, "residue class " + std::to_string(residue) + " was not built");
}

CMatrix BlockOperator::dense() const {
  CMatrix out = CMatrix::Zero(modes, modes);
  for (const auto& b : blocks) {
    for (std::size_t j = 0; j < b.wavenumbers.size(); ++j)
      for (std::size_t i = 0; i < b.wavenumbers.size(); ++i)
        out(b.wavenumbers[i] + modes / 2, b.wavenumbers[j] + modes / 2) = b.a(i, j);
  }
  return out;
}

BlockOperator build_blocks(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config,
                           const std::vector<int>& residues) {
  validate(c, spec, config);
  BlockOperator op;
  op.ratio = config.ratio;
  op.modes = resolve_modes(c, spec, config);
  const int n = config.ratio.cells();
  std::vector<int> which = residues;
  if (which.empty()) {
    for (int r = 0; r < n; ++r) which.push_back(r);
  }
  for (int r : which) {
    ClassBlock b;
    b.residue = ((r % n) + n) % n;
    for (int w = -op.modes / 2; w < op.modes / 2; ++w)
      if (op.residue_of(w) == b.residue) b.wavenumbers.push_back(w);
    b.a = generator_block(c, config.ratio, b.wavenumbers);
    for (int k = -config.cutoff; k <= config.cutoff; ++k)
      if (op.residue_of(k) == b.residue) b.forced.push_back(k);
    b.noise = CMatrix::Zero(static_cast<Eigen::Index>(b.wavenumbers.size()), static_cast<Eigen::Index>(b.forced.size()));
    for (std::size_t j = 0; j < b.forced.size(); ++j) {
      const int k = b.forced[j];
      const double weight = spec.mollifier_weight(config.ratio.eps() * k);
      const SpectralField col = oscillate(spec.profile(k), config.ratio, k, op.modes);
      for (std::size_t i = 0; i < b.wavenumbers.size(); ++i) b.noise(i, j) = weight * col[b.wavenumbers[i]];
    }
    op.blocks.push_back(std::move(b));
  }
  return op;
}

}  // namespace homlab
