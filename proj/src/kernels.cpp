#include "hierwm/kernels.hpp"

#include <stdexcept>

namespace hierwm::kern {

namespace {

// Shared element kernel: one (i, j) output cell, summed over p in increasing
// order regardless of transpose flags. Both the parallel and serial entry
// points call this, which is what makes them bitwise identical.
inline double dot_cell(const double* A, const double* B, int i, int j, int k, int m,
                       int n, bool ta, bool tb) {
    double acc = 0.0;
    if (!ta && !tb) {
        const double* a = A + static_cast<std::int64_t>(i) * k;
        for (int p = 0; p < k; ++p) acc += a[p] * B[static_cast<std::int64_t>(p) * n + j];
    } else if (!ta && tb) {
        const double* a = A + static_cast<std::int64_t>(i) * k;
        const double* b = B + static_cast<std::int64_t>(j) * k;
        for (int p = 0; p < k; ++p) acc += a[p] * b[p];
    } else if (ta && !tb) {
        for (int p = 0; p < k; ++p)
            acc += A[static_cast<std::int64_t>(p) * m + i] * B[static_cast<std::int64_t>(p) * n + j];
    } else {
        const double* b = B + static_cast<std::int64_t>(j) * k;
        for (int p = 0; p < k; ++p) acc += A[static_cast<std::int64_t>(p) * m + i] * b[p];
    }
    return acc;
}

inline double conv_cell(const double* in, int h, int w, int cin, const double* weights,
                        int kh, int kw, int cout, const double* bias, int stride, int pad,
                        int oy, int ox, int oc) {
    double acc = bias ? bias[oc] : 0.0;
    const int y0 = oy * stride - pad;
    const int x0 = ox * stride - pad;
    for (int ky = 0; ky < kh; ++ky) {
        const int y = y0 + ky;
        if (y < 0 || y >= h) continue;
        for (int kx = 0; kx < kw; ++kx) {
            const int x = x0 + kx;
            if (x < 0 || x >= w) continue;
            const double* ip = in + (static_cast<std::int64_t>(y) * w + x) * cin;
            const double* wp = weights + ((static_cast<std::int64_t>(ky) * kw + kx) * cin) * cout + oc;
            for (int c = 0; c < cin; ++c) acc += ip[c] * wp[static_cast<std::int64_t>(c) * cout];
        }
    }
    return acc;
}

}  // namespace

void matmul(const double* A, const double* B, double* C, int m, int k, int n, bool ta,
            bool tb, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        double* c = C + static_cast<std::int64_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double v = dot_cell(A, B, i, j, k, m, n, ta, tb);
            c[j] = accumulate ? c[j] + v : v;
        }
    }
}

void conv2d(const double* in, int h, int w, int cin, const double* weights, int kh, int kw,
            int cout, const double* bias, int stride, int pad, double* out) {
    const int oh = (h + 2 * pad - kh) / stride + 1;
    const int ow = (w + 2 * pad - kw) / stride + 1;
    if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: empty output");
#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double* op = out + (static_cast<std::int64_t>(oy) * ow + ox) * cout;
            for (int oc = 0; oc < cout; ++oc)
                op[oc] = conv_cell(in, h, w, cin, weights, kh, kw, cout, bias, stride, pad, oy, ox, oc);
        }
    }
}

void add(const double* a, const double* b, double* out, std::int64_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void axpy(double alpha, const double* x, double* y, std::int64_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(const double* a, double alpha, double* out, std::int64_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = alpha * a[i];
}

namespace serial {

void matmul(const double* A, const double* B, double* C, int m, int k, int n, bool ta,
            bool tb, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        double* c = C + static_cast<std::int64_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double v = dot_cell(A, B, i, j, k, m, n, ta, tb);
            c[j] = accumulate ? c[j] + v : v;
        }
    }
}

void conv2d(const double* in, int h, int w, int cin, const double* weights, int kh, int kw,
            int cout, const double* bias, int stride, int pad, double* out) {
    const int oh = (h + 2 * pad - kh) / stride + 1;
    const int ow = (w + 2 * pad - kw) / stride + 1;
    if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: empty output");
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double* op = out + (static_cast<std::int64_t>(oy) * ow + ox) * cout;
            for (int oc = 0; oc < cout; ++oc)
                op[oc] = conv_cell(in, h, w, cin, weights, kh, kw, cout, bias, stride, pad, oy, ox, oc);
        }
    }
}

}  // namespace serial

}  // namespace hierwm::kern
