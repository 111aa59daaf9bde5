#include <doctest.h>

#include <cmath>

#include "hierwm/rng.hpp"
#include "hierwm/schedule.hpp"

using namespace hierwm;

namespace {

codec::LatentClip const_clip(int k, int h, int w, int c, double v) {
    codec::LatentClip clip;
    for (int i = 0; i < k; ++i) {
        clip.latents.push_back(Tensor::full({h, w, c}, v));
        clip.frame_indices.push_back(i);
    }
    return clip;
}

codec::LatentClip noise_like(const codec::LatentClip& x, std::uint64_t seed) {
    Rng rng(seed);
    codec::LatentClip out = x;
    for (auto& lat : out.latents)
        for (auto& v : lat.data) v = rng.normal();
    return out;
}

}  // namespace

TEST_CASE("make_schedule matches an independent product loop at T=1000") {
    const int T = 1000;
    const double bmin = 1e-4, bmax = 2e-2;
    auto sched = schedule::make_schedule(T, bmin, bmax);

    // Independent oracle: accumulate the product of (1 - beta_t) directly.
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        const double beta = bmin + (bmax - bmin) * t / static_cast<double>(T - 1);
        prod *= 1.0 - beta;
    }
    CHECK(sched.alpha_bar_at(T) == doctest::Approx(prod).epsilon(1e-12));
    CHECK(prod == doctest::Approx(4.0e-5).epsilon(0.02));  // known terminal value
}

TEST_CASE("make_schedule with T=1 gives alpha_bar = (0.99)") {
    auto sched = schedule::make_schedule(1, 0.01, 0.01);
    CHECK(sched.alpha_bar_at(1) == doctest::Approx(0.99).epsilon(1e-15));
}

TEST_CASE("alpha_bar is strictly decreasing and in (0, 1]") {
    for (std::uint64_t s = 0; s < 4; ++s) {
        Rng rng(s);
        const int T = 2 + static_cast<int>(rng.below(200));
        const double bmin = 1e-5 + rng.uniform() * 1e-3;
        const double bmax = bmin + rng.uniform() * 0.05;
        auto sched = schedule::make_schedule(T, bmin, bmax);
        for (int t = 2; t <= T; ++t) CHECK(sched.alpha_bar_at(t) < sched.alpha_bar_at(t - 1));
        CHECK(sched.alpha_bar_at(T) > 0.0);
        CHECK(sched.alpha_bar_at(1) <= 1.0);
    }
}

TEST_CASE("make_schedule rejects invalid ranges") {
    CHECK_THROWS(schedule::make_schedule(0, 0.01, 0.02));
    CHECK_THROWS(schedule::make_schedule(10, 0.0, 0.02));
    CHECK_THROWS(schedule::make_schedule(10, 0.03, 0.02));
    CHECK_THROWS(schedule::make_schedule(10, 0.01, 1.0));
}

TEST_CASE("forward_diffuse at alpha_bar -> 1 approaches x0") {
    auto sched = schedule::make_schedule(1, 1e-9, 1e-9);
    auto x0 = const_clip(2, 4, 4, 3, 0.7);
    auto eps = noise_like(x0, 11);
    auto xt = schedule::forward_diffuse(x0, 1, eps, sched);
    for (int f = 0; f < 2; ++f)
        for (std::int64_t i = 0; i < xt.latents[0].size(); ++i)
            CHECK(xt.latents[static_cast<size_t>(f)][i] ==
                  doctest::Approx(x0.latents[static_cast<size_t>(f)][i]).epsilon(1e-4));
}

TEST_CASE("forward_diffuse with x0 = 0 and alpha_bar = 0.75 yields 0.5 * eps") {
    // T=1 with beta = 0.25 makes alpha_bar exactly 0.75, so sqrt(1-0.75) = 0.5.
    auto sched = schedule::make_schedule(1, 0.25, 0.25);
    auto x0 = const_clip(3, 4, 4, 2, 0.0);
    auto eps = noise_like(x0, 12);
    auto xt = schedule::forward_diffuse(x0, 1, eps, sched);
    for (int f = 0; f < 3; ++f)
        for (std::int64_t i = 0; i < xt.latents[0].size(); ++i)
            CHECK(xt.latents[static_cast<size_t>(f)][i] == 0.5 * eps.latents[static_cast<size_t>(f)][i]);
}

TEST_CASE("forward_diffuse Monte Carlo statistics match the marginal") {
    auto sched = schedule::make_schedule(100, 1e-4, 0.05);
    const int t = 60;
    const double ab = sched.alpha_bar_at(t);
    auto x0 = const_clip(1, 4, 4, 3, 0.8);

    const int draws = 10000;
    double sum = 0.0, sumsq = 0.0;
    std::int64_t count = 0;
    for (int d = 0; d < draws; ++d) {
        auto eps = noise_like(x0, 1000 + static_cast<std::uint64_t>(d));
        auto xt = schedule::forward_diffuse(x0, t, eps, sched);
        for (std::int64_t i = 0; i < xt.latents[0].size(); ++i) {
            const double centered = xt.latents[0][i] - std::sqrt(ab) * 0.8;
            sum += centered;
            sumsq += centered * centered;
            ++count;
        }
    }
    const double mean = sum / count;
    const double var = sumsq / count - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - (1.0 - ab)) < 0.05);
}

TEST_CASE("forward_diffuse validates shapes and timestep") {
    auto sched = schedule::make_schedule(10, 1e-4, 0.02);
    auto x0 = const_clip(2, 4, 4, 3, 0.5);
    auto eps = noise_like(x0, 1);
    CHECK_THROWS(schedule::forward_diffuse(x0, 0, eps, sched));
    CHECK_THROWS(schedule::forward_diffuse(x0, 11, eps, sched));
    auto bad = const_clip(3, 4, 4, 3, 0.0);
    CHECK_THROWS(schedule::forward_diffuse(x0, 5, bad, sched));
}

TEST_CASE("one_step_denoise of a fresh (zero-head) model is all zeros with the input shape") {
    denoiser::DenoiserConfig cfg;
    cfg.num_frames = 3;
    cfg.lat_h = cfg.lat_w = 4;
    cfg.lat_c = 12;
    cfg.latent_patch = 2;
    cfg.token_dim = 16;
    cfg.num_heads = 2;
    cfg.cond_dim = 8;
    auto params = denoiser::init_params(cfg, 42);

    auto x = schedule::noise_clip(cfg, 5);
    denoiser::ConditioningPack pack;
    pack.cond = Tensor::zeros({8});
    pack.first_latent = x.latents[0];
    auto pred = schedule::one_step_denoise(params, x, 7, pack);
    CHECK(pred.length() == 3);
    CHECK(pred.latents[0].shape == x.latents[0].shape);
    for (const auto& lat : pred.latents)
        for (std::int64_t i = 0; i < lat.size(); ++i) CHECK(lat[i] == 0.0);
}

TEST_CASE("sample with num_steps = 1 equals one_step_denoise at t = T") {
    denoiser::DenoiserConfig cfg;
    cfg.num_frames = 2;
    cfg.lat_h = cfg.lat_w = 4;
    cfg.lat_c = 12;
    cfg.latent_patch = 2;
    cfg.token_dim = 16;
    cfg.num_heads = 2;
    cfg.cond_dim = 8;
    auto params = denoiser::init_params(cfg, 43);
    // Give the head some weights so outputs are not trivially zero.
    Rng rng(3);
    for (auto& v : params.tensors.at("head.weight").data) v = 0.1 * rng.normal();

    auto sched = schedule::make_schedule(50, 1e-4, 0.02);
    denoiser::ConditioningPack pack;
    pack.cond = Tensor::zeros({8});
    pack.first_latent = Tensor::full({4, 4, 12}, 0.3);

    auto via_sample = schedule::sample(params, pack, 1, sched, 77);
    auto direct = schedule::one_step_denoise(params, schedule::noise_clip(cfg, 77), 50, pack);
    REQUIRE(via_sample.length() == direct.length());
    for (int f = 0; f < via_sample.length(); ++f)
        CHECK(bitwise_equal(via_sample.latents[static_cast<size_t>(f)],
                            direct.latents[static_cast<size_t>(f)]));
}

TEST_CASE("sampler is deterministic under a fixed seed") {
    denoiser::DenoiserConfig cfg;
    cfg.num_frames = 2;
    cfg.lat_h = cfg.lat_w = 4;
    cfg.lat_c = 12;
    cfg.latent_patch = 2;
    cfg.token_dim = 16;
    cfg.num_heads = 2;
    cfg.cond_dim = 8;
    auto params = denoiser::init_params(cfg, 44);
    Rng rng(4);
    for (auto& v : params.tensors.at("head.weight").data) v = 0.1 * rng.normal();

    auto sched = schedule::make_schedule(50, 1e-4, 0.02);
    denoiser::ConditioningPack pack;
    pack.cond = Tensor::zeros({8});
    pack.first_latent = Tensor::full({4, 4, 12}, 0.3);

    auto a = schedule::sample(params, pack, 8, sched, 123);
    auto b = schedule::sample(params, pack, 8, sched, 123);
    for (int f = 0; f < a.length(); ++f)
        CHECK(bitwise_equal(a.latents[static_cast<size_t>(f)], b.latents[static_cast<size_t>(f)]));
    auto c = schedule::sample(params, pack, 8, sched, 124);
    bool all_equal = true;
    for (int f = 0; f < a.length(); ++f)
        all_equal = all_equal && bitwise_equal(a.latents[static_cast<size_t>(f)],
                                               c.latents[static_cast<size_t>(f)]);
    CHECK(!all_equal);
}
