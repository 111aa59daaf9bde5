#pragma once

#include "hierwm/tensor.hpp"

// Data-parallel kernels used by the denoiser, the warp engine and the metric
// extractor. Every parallel kernel assigns each output element to exactly one
// thread and accumulates in a fixed order, so results are bitwise identical
// to the serial reference implementations in kern::serial for any thread
// count. Tests compare the two; tools/bench_kernels times them.

namespace hierwm::kern {

// C[m x n] = op(A) * op(B), op = transpose when the flag is set.
// A is [m x k] (or [k x m] when ta), B is [k x n] (or [n x k] when tb).
// When accumulate is true, C += instead of =.
void matmul(const double* A, const double* B, double* C, int m, int k, int n,
            bool ta = false, bool tb = false, bool accumulate = false);

// 2D convolution, NHWC layout. in: [h x w x cin], weights: [kh x kw x cin x cout],
// bias: [cout] (may be null), out: [oh x ow x cout] with oh = (h + 2*pad - kh)/stride + 1.
void conv2d(const double* in, int h, int w, int cin, const double* weights, int kh,
            int kw, int cout, const double* bias, int stride, int pad, double* out);

void add(const double* a, const double* b, double* out, std::int64_t n);
void axpy(double alpha, const double* x, double* y, std::int64_t n);  // y += alpha*x
void scale(const double* a, double alpha, double* out, std::int64_t n);

namespace serial {
void matmul(const double* A, const double* B, double* C, int m, int k, int n,
            bool ta = false, bool tb = false, bool accumulate = false);
void conv2d(const double* in, int h, int w, int cin, const double* weights, int kh,
            int kw, int cout, const double* bias, int stride, int pad, double* out);
}  // namespace serial

}  // namespace hierwm::kern
