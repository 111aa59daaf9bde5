#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hierwm/denoiser.hpp"
#include "hierwm/losses.hpp"
#include "hierwm/rng.hpp"
#include "hierwm/schedule.hpp"
#include "hierwm/toyworld.hpp"

namespace hierwm::trainer {

struct TrainConfig {
    int K = 13;              // frames per clip
    int coarse_stride = 12;  // frames between coarse samples
    int steps = 1;
    int batch_size = 4;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
    losses::LossWeights weights;
    double rho = 0.25;   // high-pass cutoff of the struct term
    int codec_patch = 4;

    void validate() const;
};

// Adaptive-moment optimizer state (first/second moments, bias correction).
struct AdamState {
    TensorMap m;
    TensorMap v;
    std::int64_t step = 0;

    static AdamState init_like(const TensorMap& params);
};

// One deterministic update; rejects non-finite gradients.
void optimizer_step(TensorMap& params, const TensorMap& grads, AdamState& state, double lr);

struct TraceRow {
    int step = 0;
    double loss = 0.0;
    double loss_diffusion = 0.0;
    double loss_struct = 0.0;
};

struct TrainResult {
    denoiser::DenoiserParams params;
    AdamState opt;
    std::vector<TraceRow> trace;
};

// K frames at coarse_stride from a seeded random start, encoded per frame.
// The pack carries the episode descriptor and the clean first-frame latent.
std::pair<codec::LatentClip, denoiser::ConditioningPack> sample_coarse_clip(
    const toyworld::Episode& episode, const TrainConfig& config, Rng& rng);

// K consecutive frames (stride exactly 1) with first/last conditioning and
// the seeded last-frame drop. When with_warp is set the pack also carries
// ground-truth-pose warped-frame latents for guidance.
std::pair<codec::LatentClip, denoiser::ConditioningPack> sample_fine_clip(
    const toyworld::Episode& episode, const TrainConfig& config, Rng& rng, bool with_warp = false);

// Eq-style objectives: coarse = diffusion + beta_s * struct on strided clips,
// fine = diffusion only on consecutive clips.
TrainResult train_coarse(const std::vector<toyworld::Episode>& dataset, const TrainConfig& config,
                         const denoiser::DenoiserConfig& model, const schedule::NoiseSchedule& sched);
TrainResult train_fine(const std::vector<toyworld::Episode>& dataset, const TrainConfig& config,
                       const denoiser::DenoiserConfig& model, const schedule::NoiseSchedule& sched);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

}  // namespace hierwm::trainer
