#pragma once

#include "hierwm/codec.hpp"
#include "hierwm/denoiser.hpp"
#include "hierwm/rng.hpp"
#include "hierwm/tape.hpp"
#include "hierwm/tensor.hpp"

namespace hierwm::losses {

struct LossWeights {
    double beta_s = 0.1;      // weight of the structure-preservation term
    double drop_ratio = 0.5;  // probability of hiding the last-frame condition

    void validate() const;
};

// Mean squared error over all elements of the two clips.
double diffusion_loss(const codec::LatentClip& prediction, const codec::LatentClip& target);

// Radial hard high-pass of one latent in the 2D DFT domain, per channel.
Tensor highpass(const Tensor& latent, double cutoff_fraction);

// MSE between high-passed prediction and target, per frame then averaged.
double struct_loss(const codec::LatentClip& prediction, const codec::LatentClip& target, double rho);

// diffusion + beta_s * struct.
double coarse_loss(const codec::LatentClip& prediction, const codec::LatentClip& target,
                   const LossWeights& weights, double rho);

// Conditioning for fine training: first/last clip latents, with the last one
// dropped at the configured ratio (causal vs bidirectional exposure).
denoiser::ConditioningPack make_fine_conditioning(const codec::LatentClip& clip, const Tensor& cond,
                                                  double drop_ratio, Rng& rng);

// Taped variants used by the training loops; pred is a [K, h, w, c] ref.
Tape::Ref diffusion_loss_graph(Tape& tape, Tape::Ref pred, const Tensor& target);
Tape::Ref coarse_loss_graph(Tape& tape, Tape::Ref pred, const Tensor& target,
                            const LossWeights& weights, double rho, int lat_h, int lat_w, int lat_c);

}  // namespace hierwm::losses
