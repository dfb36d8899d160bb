#include <doctest.h>

#include <cmath>

#include "homlab/rng.hpp"

using namespace homlab;

TEST_CASE("philox4x32-10 known answers") {
  using C = Philox4x32Counter;
  CHECK(philox4x32(C{0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of their keys") {
  const CounterStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  CHECK(a.normals(3, 5) == b.normals(3, 5));
  CHECK(a.normals(3, 5) != c.normals(3, 5));
  CHECK(a.normals(3, 5) != d.normals(3, 5));
  CHECK(a.normals(3, 5) != a.normals(4, 5));
  for (int i = 0; i < 1000; ++i) {
    const auto u = a.uniforms(i, 0);
    CHECK(u[0] > 0.0);
    CHECK(u[0] < 1.0);
  }
}

TEST_CASE("wiener increments: conjugacy and calibration") {
  const double dt = 0.01;
  const CounterStream s(2024, 0);
  const int samples = 100000;
  double mean_re = 0.0, sq3 = 0.0, sq3_sq = 0.0, sq0 = 0.0;
  for (int n = 0; n < samples; ++n) {
    const auto w = sample_increments(4, dt, s, n);
    CHECK(w[-3] == std::conj(w[3]));
    CHECK(w[0].imag() == 0.0);
    mean_re += w[3].real();
    const double e = std::norm(w[3]);
    sq3 += e;
    sq3_sq += e * e;
    sq0 += std::norm(w[0]);
  }
  mean_re /= samples;
  // Re dW_3 has variance dt / 2
  const double se_mean = std::sqrt(0.5 * dt / samples);
  CHECK(std::abs(mean_re) < 4.0 * se_mean);
  const double m2 = sq3 / samples;
  const double se2 = std::sqrt((sq3_sq / samples - m2 * m2) / samples);
  CHECK(std::abs(m2 - dt) < 3.0 * se2);
  // |dW_0|^2 = dt chi^2_1 has standard deviation sqrt(2) dt
  CHECK(std::abs(sq0 / samples - dt) < 3.0 * std::sqrt(2.0) * dt / std::sqrt(double(samples)));
}
