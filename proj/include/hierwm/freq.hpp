#pragma once

#include "hierwm/tensor.hpp"

namespace hierwm {

// Radial hard high-pass in the 2D DFT domain, applied independently to each
// (plane, channel) of a [planes x h x w x c] block. A frequency bin (ky, kx)
// is kept iff hypot(fold(ky)/(h/2), fold(kx)/(w/2)) >= rho, where fold(k) =
// min(k, n - k); rho = 0 keeps everything, any rho > 0 removes DC. The
// operator is linear, idempotent and self-adjoint, which the loss gradients
// rely on.
void dft_highpass(const double* in, double* out, int planes, int h, int w, int c, double rho);

// Convenience over a tensor shaped [..., h, w, c].
Tensor dft_highpass(const Tensor& x, int h, int w, int c, double rho);

}  // namespace hierwm
