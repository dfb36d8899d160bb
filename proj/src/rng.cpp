#include "homlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace homlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t{a} * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Uniform in (0, 1): 53 bits from two words, offset by half an ulp so that
// neither end point occurs.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 21) ^ (lo >> 11);
  return (static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<double, 2> CounterStream::uniforms(std::uint64_t step, std::uint32_t index) const {
  const Philox4x32Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  const Philox4x32Counter ctr{index, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                              static_cast<std::uint32_t>(path_)};
  const auto r = philox4x32(ctr, key);
  return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
}

std::array<double, 2> CounterStream::normals(std::uint64_t step, std::uint32_t index) const {
  const auto [u1, u2] = uniforms(step, index);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::complex<double> wiener_increment(const CounterStream& stream, std::uint64_t step, int k, double dt) {
  const auto z = stream.normals(step, static_cast<std::uint32_t>(k < 0 ? -k : k));
  if (k == 0) return std::sqrt(dt) * z[0];
  const double half = std::sqrt(0.5 * dt);
  const std::complex<double> w(half * z[0], half * z[1]);
  return k > 0 ? w : std::conj(w);
}

WienerBatch sample_increments(int cutoff, double dt, const CounterStream& stream, std::uint64_t step) {
  WienerBatch batch(cutoff, dt);
  for (int k = -cutoff; k <= cutoff; ++k) batch.at(k) = wiener_increment(stream, step, k, dt);
  return batch;
}

}  // namespace homlab
