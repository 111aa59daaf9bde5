#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hierwm/codec.hpp"
#include "hierwm/tape.hpp"
#include "hierwm/tensor.hpp"

namespace hierwm::denoiser {

// Miniature transformer denoiser shared by the coarse and fine models:
// latent-patch tokens, full attention over all frame tokens, timestep and
// condition embeddings added to every token, first/last-frame conditioning by
// channel concatenation with a mask channel, optional gated warp-feature
// injection per block, x0-prediction head.

struct DenoiserConfig {
    int num_frames = 13;  // K
    int lat_h = 16;
    int lat_w = 16;
    int lat_c = 48;
    int token_dim = 64;
    int num_blocks = 2;
    int num_heads = 4;
    int cond_dim = 32;
    int latent_patch = 4;  // spatial patch over the latent grid
    bool warp_injection = false;

    void validate() const;
    int tokens_per_frame() const { return (lat_h / latent_patch) * (lat_w / latent_patch); }
    int num_tokens() const { return num_frames * tokens_per_frame(); }
    int token_in_dim() const { return latent_patch * latent_patch * (2 * lat_c + 1); }
    int token_out_dim() const { return latent_patch * latent_patch * lat_c; }

    bool operator==(const DenoiserConfig&) const = default;
};

struct DenoiserParams {
    DenoiserConfig config;
    TensorMap tensors;
};

struct ConditioningPack {
    Tensor cond;           // [cond_dim]
    Tensor first_latent;   // [h, w, c]
    std::optional<Tensor> last_latent;
    bool last_drop = false;
    std::optional<codec::LatentClip> warp_latents;  // length K when present
};

// Deterministic init. Output head and warp gates are exactly zero, so a fresh
// model predicts zeros and warp conditioning is inert until trained.
DenoiserParams init_params(const DenoiserConfig& config, std::uint64_t seed);

// Ordered (name, ref) list of the registered parameter leaves of one forward.
struct ParamRefs {
    std::vector<std::pair<std::string, Tape::Ref>> refs;
    Tape::Ref at(const std::string& name) const;
};

ParamRefs register_params(Tape& tape, const DenoiserParams& params);

// Builds the taped forward pass; returns the [K, h, w, c] x0-prediction ref.
Tape::Ref build_forward(Tape& tape, const DenoiserConfig& config, const ParamRefs& refs,
                        const codec::LatentClip& noisy, int t, const ConditioningPack& pack);

// Inference forward (no gradients).
codec::LatentClip forward(const DenoiserParams& params, const codec::LatentClip& noisy, int t,
                          const ConditioningPack& pack);

// Exact reverse-mode gradients of an arbitrary scalar loss built from the
// registered parameter refs. Returns one gradient tensor per parameter, in
// parameter order, plus the loss value.
using LossBuilder = std::function<Tape::Ref(Tape&, const ParamRefs&)>;
TensorMap gradients(const DenoiserParams& params, const LossBuilder& loss, double* loss_out = nullptr);

// Warp conditioning features: patch-embeds the warped-frame latents onto the
// main token grid. [num_tokens, token_dim].
Tensor embed_warp(const DenoiserParams& params, const codec::LatentClip& warp_latents);

// Sinusoidal timestep features (input to the time MLP).
Tensor timestep_features(int t, int dim);

// Token/latent reindexing shared by forward and embed_warp.
Tensor frames_to_tokens(const Tensor& stacked, int k, int h, int w, int c, int patch);
std::vector<std::int64_t> tokens_to_frames_index(int k, int h, int w, int c, int patch);

}  // namespace hierwm::denoiser
