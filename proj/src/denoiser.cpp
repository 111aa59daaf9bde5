#include "hierwm/denoiser.hpp"

#include <cmath>
#include <stdexcept>

#include "hierwm/digest.hpp"
#include "hierwm/rng.hpp"

namespace hierwm::denoiser {

namespace {

constexpr int kTimeFeatureDim = 32;
constexpr int kMlpMult = 4;

std::string block_name(int b, const char* suffix) {
    return "blocks." + std::to_string(b) + "." + suffix;
}

}  // namespace

void DenoiserConfig::validate() const {
    if (num_frames < 2) throw std::invalid_argument("DenoiserConfig: num_frames must be >= 2");
    if (lat_h <= 0 || lat_w <= 0 || lat_c <= 0)
        throw std::invalid_argument("DenoiserConfig: invalid latent shape");
    if (latent_patch <= 0 || lat_h % latent_patch != 0 || lat_w % latent_patch != 0)
        throw std::invalid_argument("DenoiserConfig: latent size not divisible by latent_patch");
    if (token_dim <= 0 || num_heads <= 0 || token_dim % num_heads != 0)
        throw std::invalid_argument("DenoiserConfig: token_dim must be divisible by num_heads");
    if (num_blocks <= 0) throw std::invalid_argument("DenoiserConfig: num_blocks must be positive");
    if (cond_dim <= 0) throw std::invalid_argument("DenoiserConfig: cond_dim must be positive");
}

DenoiserParams init_params(const DenoiserConfig& config, std::uint64_t seed) {
    config.validate();
    DenoiserParams p;
    p.config = config;
    const int d = config.token_dim;

    // Each tensor draws from its own stream keyed by name, so two configs
    // that share a tensor initialize it identically regardless of which
    // optional tensors (warp embedding, gates) exist around it.
    auto stream = [&](const std::string& name) { return Rng(derive_seed(seed, {0x1d, fnv1a(name)})); };
    auto dense = [&](const std::string& name, int fan_in, int fan_out) {
        Rng rng = stream(name);
        return rng.normal_tensor({fan_in, fan_out}, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    };

    p.tensors.add("patch_embed.weight", dense("patch_embed.weight", config.token_in_dim(), d));
    p.tensors.add("patch_embed.bias", Tensor::zeros({d}));
    {
        Rng rng = stream("pos_embed");
        p.tensors.add("pos_embed", rng.normal_tensor({config.num_tokens(), d}, 0.02));
    }
    p.tensors.add("time_embed.w1", dense("time_embed.w1", kTimeFeatureDim, d));
    p.tensors.add("time_embed.b1", Tensor::zeros({d}));
    p.tensors.add("time_embed.w2", dense("time_embed.w2", d, d));
    p.tensors.add("time_embed.b2", Tensor::zeros({d}));
    p.tensors.add("cond_proj.weight", dense("cond_proj.weight", config.cond_dim, d));
    p.tensors.add("cond_proj.bias", Tensor::zeros({d}));

    for (int b = 0; b < config.num_blocks; ++b) {
        auto named_dense = [&](const char* suffix, int fi, int fo) {
            const std::string name = block_name(b, suffix);
            p.tensors.add(name, dense(name, fi, fo));
        };
        p.tensors.add(block_name(b, "ln1.gamma"), Tensor::full({d}, 1.0));
        p.tensors.add(block_name(b, "ln1.beta"), Tensor::zeros({d}));
        named_dense("attn.wq", d, d);
        p.tensors.add(block_name(b, "attn.bq"), Tensor::zeros({d}));
        named_dense("attn.wk", d, d);
        p.tensors.add(block_name(b, "attn.bk"), Tensor::zeros({d}));
        named_dense("attn.wv", d, d);
        p.tensors.add(block_name(b, "attn.bv"), Tensor::zeros({d}));
        named_dense("attn.wo", d, d);
        p.tensors.add(block_name(b, "attn.bo"), Tensor::zeros({d}));
        p.tensors.add(block_name(b, "ln2.gamma"), Tensor::full({d}, 1.0));
        p.tensors.add(block_name(b, "ln2.beta"), Tensor::zeros({d}));
        named_dense("mlp.w1", d, kMlpMult * d);
        p.tensors.add(block_name(b, "mlp.b1"), Tensor::zeros({kMlpMult * d}));
        named_dense("mlp.w2", kMlpMult * d, d);
        p.tensors.add(block_name(b, "mlp.b2"), Tensor::zeros({d}));
        if (config.warp_injection)
            p.tensors.add(block_name(b, "warp.gate"), Tensor::zeros({1}));
    }

    p.tensors.add("final_ln.gamma", Tensor::full({d}, 1.0));
    p.tensors.add("final_ln.beta", Tensor::zeros({d}));
    p.tensors.add("head.weight", Tensor::zeros({d, config.token_out_dim()}));
    p.tensors.add("head.bias", Tensor::zeros({config.token_out_dim()}));
    if (config.warp_injection)
        p.tensors.add("warp.embed", dense("warp.embed", config.token_out_dim(), d));  // linear, no bias
    return p;
}

Tape::Ref ParamRefs::at(const std::string& name) const {
    for (const auto& [n, r] : refs)
        if (n == name) return r;
    throw std::out_of_range("ParamRefs: no parameter named " + name);
}

ParamRefs register_params(Tape& tape, const DenoiserParams& params) {
    ParamRefs out;
    out.refs.reserve(params.tensors.size());
    for (const auto& e : params.tensors.entries()) out.refs.emplace_back(e.name, tape.param(e.tensor));
    return out;
}

Tensor timestep_features(int t, int dim) {
    Tensor f({1, dim});
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half - 1));
        f[i] = std::sin(t * freq);
        f[half + i] = std::cos(t * freq);
    }
    return f;
}

Tensor frames_to_tokens(const Tensor& stacked, int k, int h, int w, int c, int patch) {
    const int gh = h / patch;
    const int gw = w / patch;
    const int feat = patch * patch * c;
    Tensor tokens({k * gh * gw, feat});
    for (int f = 0; f < k; ++f)
        for (int py = 0; py < gh; ++py)
            for (int px = 0; px < gw; ++px) {
                double* row = tokens.ptr() +
                              (static_cast<std::int64_t>(f) * gh * gw + py * gw + px) * feat;
                for (int dy = 0; dy < patch; ++dy)
                    for (int dx = 0; dx < patch; ++dx) {
                        const std::int64_t src =
                            ((static_cast<std::int64_t>(f) * h + py * patch + dy) * w + px * patch + dx) * c;
                        for (int ch = 0; ch < c; ++ch)
                            row[(dy * patch + dx) * c + ch] = stacked[src + ch];
                    }
            }
    return tokens;
}

std::vector<std::int64_t> tokens_to_frames_index(int k, int h, int w, int c, int patch) {
    // index[i] = token-layout position feeding output element i of [k,h,w,c]
    const int gh = h / patch;
    const int gw = w / patch;
    const int feat = patch * patch * c;
    std::vector<std::int64_t> index(static_cast<size_t>(k) * h * w * c);
    for (int f = 0; f < k; ++f)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int py = y / patch, dy = y % patch;
                const int px = x / patch, dx = x % patch;
                const std::int64_t token_row = static_cast<std::int64_t>(f) * gh * gw + py * gw + px;
                for (int ch = 0; ch < c; ++ch) {
                    const std::int64_t dst = ((static_cast<std::int64_t>(f) * h + y) * w + x) * c + ch;
                    index[static_cast<size_t>(dst)] = token_row * feat + (dy * patch + dx) * c + ch;
                }
            }
    return index;
}

namespace {

// Assembles the denoiser input tokens: noisy latents concatenated channelwise
// with the conditioning latents and a mask channel marking conditioned frames.
Tensor assemble_input_tokens(const DenoiserConfig& cfg, const codec::LatentClip& noisy,
                             const ConditioningPack& pack) {
    const int k = cfg.num_frames;
    const int h = cfg.lat_h, w = cfg.lat_w, c = cfg.lat_c;
    const int cin = 2 * c + 1;
    if (noisy.length() != k) throw std::invalid_argument("denoiser: clip length does not match config");
    for (const auto& lat : noisy.latents)
        if (lat.shape != std::vector<int>{h, w, c})
            throw std::invalid_argument("denoiser: latent shape does not match config");
    if (pack.first_latent.shape != std::vector<int>{h, w, c})
        throw std::invalid_argument("denoiser: first_latent shape mismatch");
    const bool use_last = pack.last_latent.has_value() && !pack.last_drop;
    if (use_last && pack.last_latent->shape != std::vector<int>{h, w, c})
        throw std::invalid_argument("denoiser: last_latent shape mismatch");

    Tensor stacked({k, h, w, cin});
    for (int f = 0; f < k; ++f) {
        const Tensor& lat = noisy.latents[static_cast<size_t>(f)];
        const Tensor* cond_lat = nullptr;
        if (f == 0) cond_lat = &pack.first_latent;
        if (f == k - 1 && use_last) cond_lat = &*pack.last_latent;
        const double mask = cond_lat ? 1.0 : 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::int64_t src = (static_cast<std::int64_t>(y) * w + x) * c;
                double* dst = stacked.ptr() + ((static_cast<std::int64_t>(f) * h + y) * w + x) * cin;
                for (int ch = 0; ch < c; ++ch) dst[ch] = lat[src + ch];
                for (int ch = 0; ch < c; ++ch) dst[c + ch] = cond_lat ? (*cond_lat)[src + ch] : 0.0;
                dst[2 * c] = mask;
            }
    }
    return frames_to_tokens(stacked, k, h, w, cin, cfg.latent_patch);
}

}  // namespace

Tape::Ref build_forward(Tape& tape, const DenoiserConfig& cfg, const ParamRefs& refs,
                        const codec::LatentClip& noisy, int t, const ConditioningPack& pack) {
    cfg.validate();
    if (t < 1) throw std::invalid_argument("denoiser: timestep must be >= 1");
    if (static_cast<int>(pack.cond.size()) != cfg.cond_dim)
        throw std::invalid_argument("denoiser: condition vector size mismatch");

    Tape::Ref tokens = tape.input(assemble_input_tokens(cfg, noisy, pack));
    Tape::Ref h = tape.linear(tokens, refs.at("patch_embed.weight"), refs.at("patch_embed.bias"));
    h = tape.add(h, refs.at("pos_embed"));

    Tape::Ref tfeat = tape.input(timestep_features(t, kTimeFeatureDim));
    Tape::Ref temb = tape.linear(tfeat, refs.at("time_embed.w1"), refs.at("time_embed.b1"));
    temb = tape.linear(tape.gelu(temb), refs.at("time_embed.w2"), refs.at("time_embed.b2"));
    h = tape.add_row_broadcast(h, temb);

    Tape::Ref cvec = tape.input(pack.cond.reshaped({1, cfg.cond_dim}));
    Tape::Ref cemb = tape.linear(cvec, refs.at("cond_proj.weight"), refs.at("cond_proj.bias"));
    h = tape.add_row_broadcast(h, cemb);

    Tape::Ref wfeat = Tape::kNone;
    if (cfg.warp_injection && pack.warp_latents.has_value()) {
        const codec::LatentClip& warp = *pack.warp_latents;
        if (warp.length() != cfg.num_frames)
            throw std::invalid_argument("denoiser: warp clip length does not match config");
        Tensor wtokens = frames_to_tokens(warp.stacked(), cfg.num_frames, cfg.lat_h, cfg.lat_w,
                                          cfg.lat_c, cfg.latent_patch);
        wfeat = tape.linear(tape.input(std::move(wtokens)), refs.at("warp.embed"));
    }

    for (int b = 0; b < cfg.num_blocks; ++b) {
        if (wfeat != Tape::kNone) h = tape.add_gated(h, wfeat, refs.at(block_name(b, "warp.gate")));
        Tape::Ref a = tape.layer_norm(h, refs.at(block_name(b, "ln1.gamma")), refs.at(block_name(b, "ln1.beta")));
        a = tape.attention(a, refs.at(block_name(b, "attn.wq")), refs.at(block_name(b, "attn.bq")),
                           refs.at(block_name(b, "attn.wk")), refs.at(block_name(b, "attn.bk")),
                           refs.at(block_name(b, "attn.wv")), refs.at(block_name(b, "attn.bv")),
                           refs.at(block_name(b, "attn.wo")), refs.at(block_name(b, "attn.bo")),
                           cfg.num_heads);
        h = tape.add(h, a);
        Tape::Ref m = tape.layer_norm(h, refs.at(block_name(b, "ln2.gamma")), refs.at(block_name(b, "ln2.beta")));
        m = tape.linear(m, refs.at(block_name(b, "mlp.w1")), refs.at(block_name(b, "mlp.b1")));
        m = tape.linear(tape.gelu(m), refs.at(block_name(b, "mlp.w2")), refs.at(block_name(b, "mlp.b2")));
        h = tape.add(h, m);
    }

    h = tape.layer_norm(h, refs.at("final_ln.gamma"), refs.at("final_ln.beta"));
    h = tape.linear(h, refs.at("head.weight"), refs.at("head.bias"));
    return tape.permute(h, tokens_to_frames_index(cfg.num_frames, cfg.lat_h, cfg.lat_w, cfg.lat_c,
                                                  cfg.latent_patch),
                        {cfg.num_frames, cfg.lat_h, cfg.lat_w, cfg.lat_c});
}

codec::LatentClip forward(const DenoiserParams& params, const codec::LatentClip& noisy, int t,
                          const ConditioningPack& pack) {
    Tape tape(false);
    ParamRefs refs = register_params(tape, params);
    Tape::Ref out = build_forward(tape, params.config, refs, noisy, t, pack);
    return codec::LatentClip::from_stacked(tape.val(out), noisy.frame_indices);
}

TensorMap gradients(const DenoiserParams& params, const LossBuilder& loss, double* loss_out) {
    Tape tape(true);
    ParamRefs refs = register_params(tape, params);
    Tape::Ref root = loss(tape, refs);
    const double value = tape.val(root)[0];
    if (!std::isfinite(value)) throw std::runtime_error("denoiser::gradients: non-finite loss");
    tape.backward(root);
    if (loss_out) *loss_out = value;
    TensorMap grads;
    for (size_t i = 0; i < params.tensors.size(); ++i) {
        const auto& name = params.tensors.entry(i).name;
        grads.add(name, tape.grad(refs.refs[i].second));
    }
    return grads;
}

Tensor embed_warp(const DenoiserParams& params, const codec::LatentClip& warp_latents) {
    const DenoiserConfig& cfg = params.config;
    if (!cfg.warp_injection)
        throw std::logic_error("embed_warp: warp_injection disabled in this config");
    if (warp_latents.length() != cfg.num_frames)
        throw std::invalid_argument("embed_warp: warp clip length does not match config");
    Tensor tokens = frames_to_tokens(warp_latents.stacked(), cfg.num_frames, cfg.lat_h, cfg.lat_w,
                                     cfg.lat_c, cfg.latent_patch);
    Tape tape(false);
    Tape::Ref out = tape.linear(tape.input(std::move(tokens)), tape.input(params.tensors.at("warp.embed")));
    return tape.val(out);
}

}  // namespace hierwm::denoiser
