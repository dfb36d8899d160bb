#pragma once

// Counter-based normal variates. Every draw is a pure function of
// (seed, path, step, index), so paths can be generated in any order or in
// parallel and still reproduce bit for bit.

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace homlab {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3").
Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key);

/// Stream for one Monte Carlo path. Only the low 32 bits of the path index
/// enter the counter.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t path) : seed_(seed), path_(path) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t path() const noexcept { return path_; }

  /// Two independent uniforms in (0, 1) with 53 random bits each.
  std::array<double, 2> uniforms(std::uint64_t step, std::uint32_t index) const;
  /// Two independent standard normals (Box-Muller on uniforms()).
  std::array<double, 2> normals(std::uint64_t step, std::uint32_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
};

/// Increments dW_k, |k| <= K, over one step of length dt, normalised so that
/// E|dW_k|^2 = dt. dW_{-k} = conj(dW_k) and dW_0 is real.
class WienerBatch {
 public:
  WienerBatch(int cutoff, double dt) : cutoff_(cutoff), dt_(dt), inc_(2 * cutoff + 1) {}

  int cutoff() const noexcept { return cutoff_; }
  double dt() const noexcept { return dt_; }
  std::complex<double> operator[](int k) const { return inc_[k + cutoff_]; }
  std::complex<double>& at(int k) { return inc_[k + cutoff_]; }

 private:
  int cutoff_;
  double dt_;
  std::vector<std::complex<double>> inc_;
};

/// The single increment dW_k of a batch, without generating the others.
std::complex<double> wiener_increment(const CounterStream& stream, std::uint64_t step, int k, double dt);

WienerBatch sample_increments(int cutoff, double dt, const CounterStream& stream, std::uint64_t step);

}  // namespace homlab
