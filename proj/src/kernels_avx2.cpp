#include <immintrin.h>

#include "homlab/kernels.hpp"

namespace homlab::kernels {

namespace {

void cgemv(int rows, int cols, const double* a_re, const double* a_im, int lda, const double* x_re,
           const double* x_im, double* y_re, double* y_im) {
  int i = 0;
  for (; i + 4 <= rows; i += 4) {
    __m256d yr = _mm256_setzero_pd(), yi = _mm256_setzero_pd();
    for (int j = 0; j < cols; ++j) {
      const long off = static_cast<long>(j) * lda + i;
      const __m256d ar = _mm256_loadu_pd(a_re + off);
      const __m256d ai = _mm256_loadu_pd(a_im + off);
      const __m256d xr = _mm256_broadcast_sd(x_re + j);
      const __m256d xi = _mm256_broadcast_sd(x_im + j);
      yr = _mm256_fmadd_pd(ar, xr, yr);
      yr = _mm256_fnmadd_pd(ai, xi, yr);
      yi = _mm256_fmadd_pd(ar, xi, yi);
      yi = _mm256_fmadd_pd(ai, xr, yi);
    }
    _mm256_storeu_pd(y_re + i, yr);
    _mm256_storeu_pd(y_im + i, yi);
  }
  for (; i < rows; ++i) {
    double sr = 0.0, si = 0.0;
    for (int j = 0; j < cols; ++j) {
      const long off = static_cast<long>(j) * lda + i;
      sr += a_re[off] * x_re[j] - a_im[off] * x_im[j];
      si += a_re[off] * x_im[j] + a_im[off] * x_re[j];
    }
    y_re[i] = sr;
    y_im[i] = si;
  }
}

void ou_update(int n, const double* decay, const double* c_re, const double* c_im, const double* w_re,
               const double* w_im, double* x_re, double* x_im) {
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d cr = _mm256_loadu_pd(c_re + i), ci = _mm256_loadu_pd(c_im + i);
    const __m256d wr = _mm256_loadu_pd(w_re + i), wi = _mm256_loadu_pd(w_im + i);
    const __m256d d = _mm256_loadu_pd(decay + i);
    __m256d r = _mm256_fmadd_pd(cr, wr, _mm256_loadu_pd(x_re + i));
    r = _mm256_fnmadd_pd(ci, wi, r);
    __m256d m = _mm256_fmadd_pd(cr, wi, _mm256_loadu_pd(x_im + i));
    m = _mm256_fmadd_pd(ci, wr, m);
    _mm256_storeu_pd(x_re + i, _mm256_mul_pd(d, r));
    _mm256_storeu_pd(x_im + i, _mm256_mul_pd(d, m));
  }
  for (; i < n; ++i) {
    const double r = x_re[i] + c_re[i] * w_re[i] - c_im[i] * w_im[i];
    const double m = x_im[i] + c_re[i] * w_im[i] + c_im[i] * w_re[i];
    x_re[i] = decay[i] * r;
    x_im[i] = decay[i] * m;
  }
}

double weighted_abs2_sum(int n, const double* w, const double* re, const double* im) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_loadu_pd(re + i), m = _mm256_loadu_pd(im + i);
    const __m256d sq = _mm256_fmadd_pd(r, r, _mm256_mul_pd(m, m));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), sq, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += w[i] * (re[i] * re[i] + im[i] * im[i]);
  return s;
}

}  // namespace

const Table& avx2_table_impl() {
  static const Table t{cgemv, ou_update, weighted_abs2_sum};
  return t;
}

}  // namespace homlab::kernels
