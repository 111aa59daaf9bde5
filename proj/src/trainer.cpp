#include "hierwm/trainer.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hierwm/trajwarp.hpp"

namespace hierwm::trainer {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

enum SeedStream : std::uint64_t { kInitStream = 1, kStepStream = 2 };

struct SampleResult {
    TensorMap grads;
    double loss = 0.0;
    double loss_diffusion = 0.0;
    double loss_struct = 0.0;
};

// Warped-frame guidance for one fine clip: the clip's first frame reprojected
// under the ground-truth poses of the following frames.
codec::LatentClip warp_guidance(const toyworld::Episode& episode, int start, int k, int patch) {
    const Frame& base_frame = episode.frames[static_cast<size_t>(start)];
    const auto intr = trajwarp::default_intrinsics(base_frame.h, base_frame.w);
    const trajwarp::CameraPose& base = episode.poses[static_cast<size_t>(start)];

    std::vector<Frame> warped(static_cast<size_t>(k));
    warped[0] = base_frame;
#pragma omp parallel for schedule(dynamic)
    for (int i = 1; i < k; ++i) {
        const auto rel = trajwarp::relative_pose(episode.poses[static_cast<size_t>(start + i)], base);
        auto res = trajwarp::warp_frame(base_frame, rel, intr, 10.0);
        warped[static_cast<size_t>(i)] = trajwarp::inpaint(res.frame, res.mask);
    }

    std::vector<int> indices(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) indices[static_cast<size_t>(i)] = i;
    return codec::encode_clip(warped, indices, patch);
}

using ClipSampler = std::function<std::pair<codec::LatentClip, denoiser::ConditioningPack>(
    const toyworld::Episode&, Rng&)>;

TrainResult train_loop(const std::vector<toyworld::Episode>& dataset, const TrainConfig& config,
                       const denoiser::DenoiserConfig& model, const schedule::NoiseSchedule& sched,
                       const ClipSampler& sampler, bool with_struct_term) {
    config.validate();
    if (dataset.empty()) throw std::invalid_argument("trainer: empty dataset");

    TrainResult result;
    result.params = denoiser::init_params(model, derive_seed(config.seed, {kInitStream}));
    result.opt = AdamState::init_like(result.params.tensors);
    result.trace.reserve(static_cast<size_t>(config.steps));

    const int batch = config.batch_size;
    std::vector<SampleResult> samples(static_cast<size_t>(batch));

    for (int step = 0; step < config.steps; ++step) {
        // Per-sample losses and gradients are independent; compute them in
        // parallel and reduce in fixed batch order below.
#pragma omp parallel for schedule(dynamic)
        for (int b = 0; b < batch; ++b) {
            Rng rng(derive_seed(config.seed, {kStepStream, static_cast<std::uint64_t>(step),
                                              static_cast<std::uint64_t>(b)}));
            const toyworld::Episode& episode =
                dataset[static_cast<size_t>(rng.below(dataset.size()))];
            auto [clip, pack] = sampler(episode, rng);

            const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(sched.T)));
            codec::LatentClip eps = clip;
            for (auto& lat : eps.latents)
                for (auto& v : lat.data) v = rng.normal();
            codec::LatentClip noisy = schedule::forward_diffuse(clip, t, eps, sched);

            Tape tape(true);
            denoiser::ParamRefs refs = denoiser::register_params(tape, result.params);
            Tape::Ref out = denoiser::build_forward(tape, model, refs, noisy, t, pack);
            Tensor target = clip.stacked();
            Tape::Ref diff = tape.mse(out, tape.input(target));
            Tape::Ref root = diff;
            Tape::Ref struct_term = Tape::kNone;
            if (with_struct_term && config.weights.beta_s > 0.0) {
                Tape::Ref hp = tape.highpass(out, model.lat_h, model.lat_w, model.lat_c, config.rho);
                Tape::Ref ht = tape.highpass(tape.input(target), model.lat_h, model.lat_w,
                                             model.lat_c, config.rho);
                struct_term = tape.mse(hp, ht);
                root = tape.add_scaled(diff, struct_term, config.weights.beta_s);
            }
            tape.backward(root);

            SampleResult& sr = samples[static_cast<size_t>(b)];
            sr.loss = tape.val(root)[0];
            sr.loss_diffusion = tape.val(diff)[0];
            sr.loss_struct = struct_term == Tape::kNone ? 0.0 : tape.val(struct_term)[0];
            TensorMap grads;
            for (size_t i = 0; i < result.params.tensors.size(); ++i)
                grads.add(result.params.tensors.entry(i).name, tape.grad(refs.refs[i].second));
            sr.grads = std::move(grads);
        }

        TraceRow row;
        row.step = step;
        TensorMap mean_grads = result.params.tensors.zeros_like();
        for (int b = 0; b < batch; ++b) {
            const SampleResult& sr = samples[static_cast<size_t>(b)];
            row.loss += sr.loss;
            row.loss_diffusion += sr.loss_diffusion;
            row.loss_struct += sr.loss_struct;
            for (size_t i = 0; i < mean_grads.size(); ++i) {
                Tensor& acc = mean_grads.entry(i).tensor;
                const Tensor& g = sr.grads.entry(i).tensor;
                for (std::int64_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
            }
        }
        const double inv = 1.0 / batch;
        row.loss *= inv;
        row.loss_diffusion *= inv;
        row.loss_struct *= inv;
        for (size_t i = 0; i < mean_grads.size(); ++i)
            for (auto& v : mean_grads.entry(i).tensor.data) v *= inv;

        if (!std::isfinite(row.loss))
            throw std::runtime_error("trainer: diverged (non-finite loss at step " +
                                     std::to_string(step) + ")");
        optimizer_step(result.params.tensors, mean_grads, result.opt, config.learning_rate);
        result.trace.push_back(row);
    }
    return result;
}

}  // namespace

void TrainConfig::validate() const {
    if (K < 2) throw std::invalid_argument("TrainConfig: K must be >= 2");
    if (coarse_stride < 1) throw std::invalid_argument("TrainConfig: coarse_stride must be >= 1");
    if (steps < 1) throw std::invalid_argument("TrainConfig: steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    if (codec_patch < 1) throw std::invalid_argument("TrainConfig: codec_patch must be >= 1");
    weights.validate();
    if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("TrainConfig: rho must be in [0, 1)");
}

AdamState AdamState::init_like(const TensorMap& params) {
    AdamState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    s.step = 0;
    return s;
}

void optimizer_step(TensorMap& params, const TensorMap& grads, AdamState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("optimizer_step: structure mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params.entry(i).tensor;
        const Tensor& g = grads.entry(i).tensor;
        Tensor& m = state.m.entry(i).tensor;
        Tensor& v = state.v.entry(i).tensor;
        if (!p.same_shape(g)) throw std::invalid_argument("optimizer_step: gradient shape mismatch");
        for (std::int64_t j = 0; j < p.size(); ++j) {
            if (!std::isfinite(g[j])) throw std::runtime_error("optimizer_step: non-finite gradient");
            m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g[j];
            v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= lr * mhat / (std::sqrt(vhat) + kEps);
        }
    }
}

std::pair<codec::LatentClip, denoiser::ConditioningPack> sample_coarse_clip(
    const toyworld::Episode& episode, const TrainConfig& config, Rng& rng) {
    config.validate();
    const int needed = (config.K - 1) * config.coarse_stride + 1;
    const int len = static_cast<int>(episode.frames.size());
    if (len < needed)
        throw std::invalid_argument("sample_coarse_clip: episode too short (needs " +
                                    std::to_string(needed) + " frames, has " + std::to_string(len) + ")");
    const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(len - needed + 1)));
    std::vector<int> indices(static_cast<size_t>(config.K));
    for (int i = 0; i < config.K; ++i) indices[static_cast<size_t>(i)] = start + i * config.coarse_stride;
    codec::LatentClip clip = codec::encode_clip(episode.frames, indices, config.codec_patch);

    denoiser::ConditioningPack pack;
    pack.cond = episode.descriptor;
    pack.first_latent = clip.latents.front();
    return {std::move(clip), std::move(pack)};
}

std::pair<codec::LatentClip, denoiser::ConditioningPack> sample_fine_clip(
    const toyworld::Episode& episode, const TrainConfig& config, Rng& rng, bool with_warp) {
    config.validate();
    const int len = static_cast<int>(episode.frames.size());
    if (len < config.K)
        throw std::invalid_argument("sample_fine_clip: episode too short (needs " +
                                    std::to_string(config.K) + " frames, has " + std::to_string(len) + ")");
    const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(len - config.K + 1)));
    std::vector<int> indices(static_cast<size_t>(config.K));
    for (int i = 0; i < config.K; ++i) indices[static_cast<size_t>(i)] = start + i;
    codec::LatentClip clip = codec::encode_clip(episode.frames, indices, config.codec_patch);

    denoiser::ConditioningPack pack =
        losses::make_fine_conditioning(clip, episode.descriptor, config.weights.drop_ratio, rng);
    if (with_warp)
        pack.warp_latents = warp_guidance(episode, start, config.K, config.codec_patch);
    return {std::move(clip), std::move(pack)};
}

TrainResult train_coarse(const std::vector<toyworld::Episode>& dataset, const TrainConfig& config,
                         const denoiser::DenoiserConfig& model, const schedule::NoiseSchedule& sched) {
    if (model.num_frames != config.K)
        throw std::invalid_argument("train_coarse: model num_frames must equal K");
    auto sampler = [&config](const toyworld::Episode& ep, Rng& rng) {
        return sample_coarse_clip(ep, config, rng);
    };
    return train_loop(dataset, config, model, sched, sampler, /*with_struct_term=*/true);
}

TrainResult train_fine(const std::vector<toyworld::Episode>& dataset, const TrainConfig& config,
                       const denoiser::DenoiserConfig& model, const schedule::NoiseSchedule& sched) {
    if (model.num_frames != config.K)
        throw std::invalid_argument("train_fine: model num_frames must equal K");
    const bool with_warp = model.warp_injection;
    auto sampler = [&config, with_warp](const toyworld::Episode& ep, Rng& rng) {
        return sample_fine_clip(ep, config, rng, with_warp);
    };
    return train_loop(dataset, config, model, sched, sampler, /*with_struct_term=*/false);
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    out << "step,loss,loss_diffusion,loss_struct\n";
    for (const auto& row : trace)
        out << row.step << ',' << row.loss << ',' << row.loss_diffusion << ',' << row.loss_struct << '\n';
}

}  // namespace hierwm::trainer
