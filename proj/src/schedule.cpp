#include "hierwm/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include "hierwm/rng.hpp"

namespace hierwm::schedule {

double NoiseSchedule::alpha_at(int t) const {
    if (t < 1 || t > T) throw std::out_of_range("NoiseSchedule: timestep out of range");
    return alpha[static_cast<size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar_at(int t) const {
    if (t < 1 || t > T) throw std::out_of_range("NoiseSchedule: timestep out of range");
    return alpha_bar[static_cast<size_t>(t - 1)];
}

void NoiseSchedule::validate() const {
    if (T < 1 || static_cast<int>(alpha.size()) != T || static_cast<int>(alpha_bar.size()) != T)
        throw std::invalid_argument("NoiseSchedule: inconsistent sizes");
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        if (!(alpha[static_cast<size_t>(t)] > 0.0 && alpha[static_cast<size_t>(t)] < 1.0))
            throw std::invalid_argument("NoiseSchedule: alpha_t must be in (0, 1)");
        prod *= alpha[static_cast<size_t>(t)];
        if (std::abs(prod - alpha_bar[static_cast<size_t>(t)]) > 1e-12)
            throw std::invalid_argument("NoiseSchedule: alpha_bar is not the running product");
        if (!(alpha_bar[static_cast<size_t>(t)] > 0.0 && alpha_bar[static_cast<size_t>(t)] <= 1.0))
            throw std::invalid_argument("NoiseSchedule: alpha_bar out of (0, 1]");
        if (t > 0 && alpha_bar[static_cast<size_t>(t)] >= alpha_bar[static_cast<size_t>(t - 1)])
            throw std::invalid_argument("NoiseSchedule: alpha_bar must be strictly decreasing");
    }
}

NoiseSchedule make_schedule(int T, double beta_min, double beta_max) {
    if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
    if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0))
        throw std::invalid_argument("make_schedule: need 0 < beta_min <= beta_max < 1");
    NoiseSchedule s;
    s.T = T;
    s.alpha.resize(static_cast<size_t>(T));
    s.alpha_bar.resize(static_cast<size_t>(T));
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        const double beta =
            T == 1 ? beta_min : beta_min + (beta_max - beta_min) * t / static_cast<double>(T - 1);
        s.alpha[static_cast<size_t>(t)] = 1.0 - beta;
        prod *= s.alpha[static_cast<size_t>(t)];
        s.alpha_bar[static_cast<size_t>(t)] = prod;
    }
    s.validate();
    return s;
}

codec::LatentClip forward_diffuse(const codec::LatentClip& x0, int t, const codec::LatentClip& eps,
                                  const NoiseSchedule& sched) {
    x0.validate();
    if (eps.length() != x0.length()) throw std::invalid_argument("forward_diffuse: clip length mismatch");
    const double ab = sched.alpha_bar_at(t);
    const double cs = std::sqrt(ab);
    const double cn = std::sqrt(1.0 - ab);
    codec::LatentClip out = x0;
    for (int i = 0; i < x0.length(); ++i) {
        const Tensor& e = eps.latents[static_cast<size_t>(i)];
        Tensor& o = out.latents[static_cast<size_t>(i)];
        if (!e.same_shape(o)) throw std::invalid_argument("forward_diffuse: noise shape mismatch");
        for (std::int64_t j = 0; j < o.size(); ++j) o[j] = cs * o[j] + cn * e[j];
    }
    return out;
}

codec::LatentClip one_step_denoise(const denoiser::DenoiserParams& params,
                                   const codec::LatentClip& x_t, int t,
                                   const denoiser::ConditioningPack& pack) {
    return denoiser::forward(params, x_t, t, pack);
}

codec::LatentClip noise_clip(const denoiser::DenoiserConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    codec::LatentClip clip;
    for (int i = 0; i < config.num_frames; ++i) {
        clip.latents.push_back(rng.normal_tensor({config.lat_h, config.lat_w, config.lat_c}));
        clip.frame_indices.push_back(i);
    }
    return clip;
}

codec::LatentClip sample(const denoiser::DenoiserParams& params,
                         const denoiser::ConditioningPack& pack, int num_steps,
                         const NoiseSchedule& sched, std::uint64_t seed) {
    if (num_steps < 1) throw std::invalid_argument("sample: num_steps must be >= 1");
    const int T = sched.T;

    // Evenly spaced descending timesteps starting at T.
    std::vector<int> ts(static_cast<size_t>(num_steps));
    for (int i = 0; i < num_steps; ++i) {
        const double frac = static_cast<double>(num_steps - i) / num_steps;
        ts[static_cast<size_t>(i)] = std::max(1, static_cast<int>(std::llround(frac * T)));
    }
    ts[0] = T;

    codec::LatentClip x = noise_clip(params.config, seed);
    codec::LatentClip x0_hat = x;
    for (int i = 0; i < num_steps; ++i) {
        const int t = ts[static_cast<size_t>(i)];
        x0_hat = denoiser::forward(params, x, t, pack);
        if (i == num_steps - 1) break;
        const int t_next = ts[static_cast<size_t>(i + 1)];
        const double ab = sched.alpha_bar_at(t);
        const double abn = sched.alpha_bar_at(t_next);
        const double cs = std::sqrt(ab);
        const double cn = std::sqrt(1.0 - ab);
        const double ns = std::sqrt(abn);
        const double nn = std::sqrt(1.0 - abn);
        for (int f = 0; f < x.length(); ++f) {
            Tensor& xt = x.latents[static_cast<size_t>(f)];
            const Tensor& x0 = x0_hat.latents[static_cast<size_t>(f)];
            for (std::int64_t j = 0; j < xt.size(); ++j) {
                const double eps_hat = (xt[j] - cs * x0[j]) / cn;
                xt[j] = ns * x0[j] + nn * eps_hat;
            }
        }
    }
    return x0_hat;
}

}  // namespace hierwm::schedule
