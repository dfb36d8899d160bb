#pragma once

// Hot loops of the path simulator with a portable scalar implementation and
// an AVX2/FMA one chosen at runtime. Complex data is stored as split real and
// imaginary arrays; matrices are column-major.
//
// Setting HOMLAB_FORCE_SCALAR=1 in the environment pins the scalar table.

#include <string>

namespace homlab::kernels {

enum class Isa { Scalar, Avx2 };

std::string to_string(Isa isa);

struct Table {
  /// y = A x for a rows x cols matrix with leading dimension lda.
  void (*cgemv)(int rows, int cols, const double* a_re, const double* a_im, int lda, const double* x_re,
                const double* x_im, double* y_re, double* y_im);
  /// x_i <- d_i (x_i + c_i w_i) with complex c, w and real d.
  void (*ou_update)(int n, const double* decay, const double* c_re, const double* c_im, const double* w_re,
                    const double* w_im, double* x_re, double* x_im);
  /// sum_i w_i (re_i^2 + im_i^2)
  double (*weighted_abs2_sum)(int n, const double* w, const double* re, const double* im);
};

const Table& scalar_table();
/// nullptr when the AVX2 unit was not compiled in.
const Table* avx2_table();
bool cpu_has_avx2();

/// Table used by the library: AVX2 when compiled in, supported by the CPU
/// and not overridden by the environment.
const Table& active();
Isa active_isa();

}  // namespace homlab::kernels
