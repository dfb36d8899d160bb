#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "homlab/kernels.hpp"

using namespace homlab::kernels;

namespace {

std::vector<double> randoms(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

}  // namespace

TEST_CASE("scalar cgemv matches the textbook complex product") {
  std::mt19937_64 gen(1);
  const int rows = 7, cols = 5, lda = 9;
  const auto ar = randoms(lda * cols, gen), ai = randoms(lda * cols, gen);
  const auto xr = randoms(cols, gen), xi = randoms(cols, gen);
  std::vector<double> yr(rows), yi(rows);
  scalar_table().cgemv(rows, cols, ar.data(), ai.data(), lda, xr.data(), xi.data(), yr.data(), yi.data());
  for (int i = 0; i < rows; ++i) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < cols; ++j) s += std::complex<double>(ar[j * lda + i], ai[j * lda + i]) * std::complex<double>(xr[j], xi[j]);
    CHECK(std::abs(s - std::complex<double>(yr[i], yi[i])) < 1e-13);
  }
}

TEST_CASE("active kernels agree with the scalar reference") {
  const Table& ref = scalar_table();
  const Table& act = active();
  MESSAGE("active kernel set: " << to_string(active_isa()));
  if (avx2_table() == nullptr || !cpu_has_avx2()) {
    MESSAGE("AVX2 unavailable; only the scalar path is exercised");
  }
  std::mt19937_64 gen(2);
  const Table* variants[] = {&act, cpu_has_avx2() ? avx2_table() : nullptr};
  for (const Table* t : variants) {
    if (t == nullptr) continue;
    for (int rows : {1, 3, 4, 8, 13, 16, 31}) {
      const int cols = rows + 2, lda = rows + 1;
      const auto ar = randoms(lda * cols, gen), ai = randoms(lda * cols, gen);
      const auto xr = randoms(cols, gen), xi = randoms(cols, gen);
      std::vector<double> y1r(rows), y1i(rows), y2r(rows), y2i(rows);
      ref.cgemv(rows, cols, ar.data(), ai.data(), lda, xr.data(), xi.data(), y1r.data(), y1i.data());
      t->cgemv(rows, cols, ar.data(), ai.data(), lda, xr.data(), xi.data(), y2r.data(), y2i.data());
      for (int i = 0; i < rows; ++i) {
        CHECK(std::abs(y1r[i] - y2r[i]) < 1e-12 * (1 + std::abs(y1r[i])));
        CHECK(std::abs(y1i[i] - y2i[i]) < 1e-12 * (1 + std::abs(y1i[i])));
      }

      const int n = rows;
      const auto d = randoms(n, gen), cr = randoms(n, gen), ci = randoms(n, gen), wr = randoms(n, gen),
                 wi = randoms(n, gen);
      auto x1r = randoms(n, gen), x1i = randoms(n, gen);
      auto x2r = x1r, x2i = x1i;
      ref.ou_update(n, d.data(), cr.data(), ci.data(), wr.data(), wi.data(), x1r.data(), x1i.data());
      t->ou_update(n, d.data(), cr.data(), ci.data(), wr.data(), wi.data(), x2r.data(), x2i.data());
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(x1r[i] - x2r[i]) < 1e-12 * (1 + std::abs(x1r[i])));
        CHECK(std::abs(x1i[i] - x2i[i]) < 1e-12 * (1 + std::abs(x1i[i])));
      }

      const double s1 = ref.weighted_abs2_sum(n, d.data(), x1r.data(), x1i.data());
      const double s2 = t->weighted_abs2_sum(n, d.data(), x1r.data(), x1i.data());
      CHECK(std::abs(s1 - s2) < 1e-12 * (1 + std::abs(s1)));
    }
  }
}
