#include "hierwm/losses.hpp"

#include <stdexcept>

#include "hierwm/freq.hpp"

namespace hierwm::losses {

void LossWeights::validate() const {
    if (beta_s < 0.0) throw std::invalid_argument("LossWeights: beta_s must be >= 0");
    if (drop_ratio < 0.0 || drop_ratio > 1.0)
        throw std::invalid_argument("LossWeights: drop_ratio must be in [0, 1]");
}

namespace {

void check_pair(const codec::LatentClip& a, const codec::LatentClip& b) {
    if (a.length() != b.length()) throw std::invalid_argument("loss: clip length mismatch");
    for (int i = 0; i < a.length(); ++i)
        if (!a.latents[static_cast<size_t>(i)].same_shape(b.latents[static_cast<size_t>(i)]))
            throw std::invalid_argument("loss: latent shape mismatch");
}

double mse_clips(const codec::LatentClip& a, const codec::LatentClip& b) {
    double acc = 0.0;
    std::int64_t n = 0;
    for (int i = 0; i < a.length(); ++i) {
        const Tensor& x = a.latents[static_cast<size_t>(i)];
        const Tensor& y = b.latents[static_cast<size_t>(i)];
        for (std::int64_t j = 0; j < x.size(); ++j) {
            const double d = x[j] - y[j];
            acc += d * d;
        }
        n += x.size();
    }
    return acc / static_cast<double>(n);
}

}  // namespace

double diffusion_loss(const codec::LatentClip& prediction, const codec::LatentClip& target) {
    check_pair(prediction, target);
    return mse_clips(prediction, target);
}

Tensor highpass(const Tensor& latent, double cutoff_fraction) {
    if (latent.ndim() != 3) throw std::invalid_argument("highpass: latent must be [h, w, c]");
    return dft_highpass(latent, latent.dim(0), latent.dim(1), latent.dim(2), cutoff_fraction);
}

double struct_loss(const codec::LatentClip& prediction, const codec::LatentClip& target, double rho) {
    check_pair(prediction, target);
    double acc = 0.0;
    for (int i = 0; i < prediction.length(); ++i) {
        const Tensor hp = highpass(prediction.latents[static_cast<size_t>(i)], rho);
        const Tensor ht = highpass(target.latents[static_cast<size_t>(i)], rho);
        double frame = 0.0;
        for (std::int64_t j = 0; j < hp.size(); ++j) {
            const double d = hp[j] - ht[j];
            frame += d * d;
        }
        acc += frame / static_cast<double>(hp.size());
    }
    return acc / static_cast<double>(prediction.length());
}

double coarse_loss(const codec::LatentClip& prediction, const codec::LatentClip& target,
                   const LossWeights& weights, double rho) {
    weights.validate();
    return diffusion_loss(prediction, target) + weights.beta_s * struct_loss(prediction, target, rho);
}

denoiser::ConditioningPack make_fine_conditioning(const codec::LatentClip& clip, const Tensor& cond,
                                                  double drop_ratio, Rng& rng) {
    if (clip.length() < 2) throw std::invalid_argument("make_fine_conditioning: clip length must be >= 2");
    if (drop_ratio < 0.0 || drop_ratio > 1.0)
        throw std::invalid_argument("make_fine_conditioning: drop_ratio must be in [0, 1]");
    denoiser::ConditioningPack pack;
    pack.cond = cond;
    pack.first_latent = clip.latents.front();
    pack.last_latent = clip.latents.back();
    pack.last_drop = rng.bernoulli(drop_ratio);
    return pack;
}

Tape::Ref diffusion_loss_graph(Tape& tape, Tape::Ref pred, const Tensor& target) {
    return tape.mse(pred, tape.input(target));
}

Tape::Ref coarse_loss_graph(Tape& tape, Tape::Ref pred, const Tensor& target,
                            const LossWeights& weights, double rho, int lat_h, int lat_w, int lat_c) {
    weights.validate();
    Tape::Ref target_ref = tape.input(target);
    Tape::Ref diff = tape.mse(pred, target_ref);
    if (weights.beta_s == 0.0) return diff;
    Tape::Ref hp = tape.highpass(pred, lat_h, lat_w, lat_c, rho);
    Tape::Ref ht = tape.highpass(target_ref, lat_h, lat_w, lat_c, rho);
    return tape.add_scaled(diff, tape.mse(hp, ht), weights.beta_s);
}

}  // namespace hierwm::losses
