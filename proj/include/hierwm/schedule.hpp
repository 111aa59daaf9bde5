#pragma once

#include <cstdint>
#include <vector>

#include "hierwm/codec.hpp"
#include "hierwm/denoiser.hpp"
#include "hierwm/tensor.hpp"

namespace hierwm::schedule {

// Forward-process tables: alpha[t-1] = 1 - beta_t with beta linearly spaced,
// alpha_bar the running product. Timesteps are 1-based (1..T).
struct NoiseSchedule {
    int T = 0;
    std::vector<double> alpha;      // alpha[t-1] = alpha_t
    std::vector<double> alpha_bar;  // alpha_bar[t-1] = prod_{s<=t} alpha_s

    double alpha_at(int t) const;
    double alpha_bar_at(int t) const;
    void validate() const;
};

NoiseSchedule make_schedule(int T, double beta_min, double beta_max);

// x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps, elementwise.
codec::LatentClip forward_diffuse(const codec::LatentClip& x0, int t, const codec::LatentClip& eps,
                                  const NoiseSchedule& sched);

// Direct x0-prediction of the denoiser at timestep t.
codec::LatentClip one_step_denoise(const denoiser::DenoiserParams& params,
                                   const codec::LatentClip& x_t, int t,
                                   const denoiser::ConditioningPack& pack);

// Deterministic sampler: start from seeded Gaussian noise at t = T; at each
// of num_steps evenly spaced timesteps predict x0 and move to the next
// timestep's marginal using the implied noise (DDIM-style, eta = 0).
// num_steps = 1 reduces to one_step_denoise at t = T.
codec::LatentClip sample(const denoiser::DenoiserParams& params,
                         const denoiser::ConditioningPack& pack, int num_steps,
                         const NoiseSchedule& sched, std::uint64_t seed);

// Gaussian clip with the model's latent shape; used by the sampler and tests.
codec::LatentClip noise_clip(const denoiser::DenoiserConfig& config, std::uint64_t seed);

}  // namespace hierwm::schedule
