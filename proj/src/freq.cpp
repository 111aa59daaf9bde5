#include "hierwm/freq.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace hierwm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Naive DFT along one axis of a complex plane. Fine at latent sizes.
void dft_axis(std::vector<std::complex<double>>& plane, int h, int w, bool rows, bool inverse) {
    const int n = rows ? w : h;
    const int lines = rows ? h : w;
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<std::complex<double>> twiddle(static_cast<size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            twiddle[static_cast<size_t>(k) * n + j] =
                std::polar(1.0, sign * kTwoPi * k * j / n);

    std::vector<std::complex<double>> line(static_cast<size_t>(n));
    for (int l = 0; l < lines; ++l) {
        for (int j = 0; j < n; ++j)
            line[static_cast<size_t>(j)] = rows ? plane[static_cast<size_t>(l) * w + j]
                                                : plane[static_cast<size_t>(j) * w + l];
        for (int k = 0; k < n; ++k) {
            std::complex<double> acc{0.0, 0.0};
            const std::complex<double>* tw = twiddle.data() + static_cast<size_t>(k) * n;
            for (int j = 0; j < n; ++j) acc += tw[j] * line[static_cast<size_t>(j)];
            if (inverse) acc /= static_cast<double>(n);
            if (rows)
                plane[static_cast<size_t>(l) * w + k] = acc;
            else
                plane[static_cast<size_t>(k) * w + l] = acc;
        }
    }
}

std::vector<unsigned char> radial_keep_mask(int h, int w, double rho) {
    std::vector<unsigned char> keep(static_cast<size_t>(h) * w, 1);
    const double ny = h > 1 ? h / 2.0 : 1.0;
    const double nx = w > 1 ? w / 2.0 : 1.0;
    for (int ky = 0; ky < h; ++ky) {
        const double fy = std::min(ky, h - ky) / ny;
        for (int kx = 0; kx < w; ++kx) {
            const double fx = std::min(kx, w - kx) / nx;
            if (std::hypot(fy, fx) < rho) keep[static_cast<size_t>(ky) * w + kx] = 0;
        }
    }
    return keep;
}

}  // namespace

void dft_highpass(const double* in, double* out, int planes, int h, int w, int c, double rho) {
    if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("dft_highpass: rho must be in [0, 1)");
    const auto keep = radial_keep_mask(h, w, rho);
    const std::int64_t plane_stride = static_cast<std::int64_t>(h) * w * c;

#pragma omp parallel for schedule(static) collapse(2)
    for (int p = 0; p < planes; ++p) {
        for (int ch = 0; ch < c; ++ch) {
            std::vector<std::complex<double>> plane(static_cast<size_t>(h) * w);
            const double* src = in + static_cast<std::int64_t>(p) * plane_stride;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    plane[static_cast<size_t>(y) * w + x] =
                        src[(static_cast<std::int64_t>(y) * w + x) * c + ch];

            dft_axis(plane, h, w, /*rows=*/true, /*inverse=*/false);
            dft_axis(plane, h, w, /*rows=*/false, /*inverse=*/false);
            for (size_t i = 0; i < plane.size(); ++i)
                if (!keep[i]) plane[i] = {0.0, 0.0};
            dft_axis(plane, h, w, /*rows=*/false, /*inverse=*/true);
            dft_axis(plane, h, w, /*rows=*/true, /*inverse=*/true);

            double* dst = out + static_cast<std::int64_t>(p) * plane_stride;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    dst[(static_cast<std::int64_t>(y) * w + x) * c + ch] =
                        plane[static_cast<size_t>(y) * w + x].real();
        }
    }
}

Tensor dft_highpass(const Tensor& x, int h, int w, int c, double rho) {
    const std::int64_t plane = static_cast<std::int64_t>(h) * w * c;
    if (plane == 0 || x.size() % plane != 0)
        throw std::invalid_argument("dft_highpass: tensor size not a multiple of h*w*c");
    Tensor out(x.shape);
    dft_highpass(x.ptr(), out.ptr(), static_cast<int>(x.size() / plane), h, w, c, rho);
    return out;
}

}  // namespace hierwm
