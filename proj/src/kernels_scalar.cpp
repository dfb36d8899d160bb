#include "homlab/kernels.hpp"

namespace homlab::kernels {

namespace {

void cgemv(int rows, int cols, const double* a_re, const double* a_im, int lda, const double* x_re,
           const double* x_im, double* y_re, double* y_im) {
  for (int i = 0; i < rows; ++i) y_re[i] = y_im[i] = 0.0;
  for (int j = 0; j < cols; ++j) {
    const double xr = x_re[j], xi = x_im[j];
    const double* cr = a_re + static_cast<long>(j) * lda;
    const double* ci = a_im + static_cast<long>(j) * lda;
    for (int i = 0; i < rows; ++i) {
      y_re[i] += cr[i] * xr - ci[i] * xi;
      y_im[i] += cr[i] * xi + ci[i] * xr;
    }
  }
}

void ou_update(int n, const double* decay, const double* c_re, const double* c_im, const double* w_re,
               const double* w_im, double* x_re, double* x_im) {
  for (int i = 0; i < n; ++i) {
    const double r = x_re[i] + c_re[i] * w_re[i] - c_im[i] * w_im[i];
    const double m = x_im[i] + c_re[i] * w_im[i] + c_im[i] * w_re[i];
    x_re[i] = decay[i] * r;
    x_im[i] = decay[i] * m;
  }
}

double weighted_abs2_sum(int n, const double* w, const double* re, const double* im) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w[i] * (re[i] * re[i] + im[i] * im[i]);
  return s;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{cgemv, ou_update, weighted_abs2_sum};
  return t;
}

}  // namespace homlab::kernels
