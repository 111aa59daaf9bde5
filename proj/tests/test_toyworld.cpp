#include <doctest.h>

#include <cmath>

#include "hierwm/digest.hpp"
#include "hierwm/toyworld.hpp"

using namespace hierwm;

namespace {

toyworld::WorldParams params_with_seed(std::uint64_t seed) {
    toyworld::WorldParams p;
    p.seed = seed;
    return p;
}

std::array<double, 3> camera_center(const trajwarp::CameraPose& pose) {
    // C_t in frame-0 coordinates: c = -R^T * T
    std::array<double, 3> c{};
    for (int i = 0; i < 3; ++i)
        c[static_cast<size_t>(i)] = -(pose.R[static_cast<size_t>(i)] * pose.T[0] +
                                      pose.R[static_cast<size_t>(3 + i)] * pose.T[1] +
                                      pose.R[static_cast<size_t>(6 + i)] * pose.T[2]);
    return c;
}

}  // namespace

TEST_CASE("gen_episode(seed=7, length=145) yields 145 frames and poses") {
    auto ep = toyworld::gen_episode(params_with_seed(7), 145);
    CHECK(ep.frames.size() == 145);
    CHECK(ep.poses.size() == 145);
    CHECK(ep.descriptor.size() == toyworld::kDescriptorDim);
}

TEST_CASE("gen_episode(length=1) yields a single frame with descriptor") {
    auto ep = toyworld::gen_episode(params_with_seed(7), 1);
    CHECK(ep.frames.size() == 1);
    CHECK(ep.poses.size() == 1);
    CHECK(ep.descriptor.size() == toyworld::kDescriptorDim);
    CHECK(ep.frame_period > 0.0);
}

TEST_CASE("gen_episode is deterministic: frame 13 identical across runs") {
    auto a = toyworld::gen_episode(params_with_seed(7), 20);
    auto b = toyworld::gen_episode(params_with_seed(7), 20);
    CHECK(bitwise_equal(a.frames[13], b.frames[13]));
    for (int i = 0; i < 20; ++i) CHECK(bitwise_equal(a.frames[static_cast<size_t>(i)], b.frames[static_cast<size_t>(i)]));
    CHECK(bitwise_equal(a.descriptor, b.descriptor));
}

TEST_CASE("different seeds give different episodes") {
    auto a = toyworld::gen_episode(params_with_seed(7), 5);
    auto b = toyworld::gen_episode(params_with_seed(8), 5);
    CHECK(!bitwise_equal(a.frames[0], b.frames[0]));
}

TEST_CASE("gen_episode rejects length 0") { CHECK_THROWS(toyworld::gen_episode(params_with_seed(7), 0)); }

TEST_CASE("all pixels lie in [0, 1]") {
    auto ep = toyworld::gen_episode(params_with_seed(21), 30);
    for (const auto& f : ep.frames)
        for (float v : f.rgb) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
}

TEST_CASE("poses: frame 0 identity, rotations valid, centers move at most max speed") {
    toyworld::WorldParams p = params_with_seed(9);
    auto ep = toyworld::gen_episode(p, 40);

    const auto& p0 = ep.poses[0];
    for (int i = 0; i < 9; ++i)
        CHECK(p0.R[static_cast<size_t>(i)] == (i % 4 == 0 ? 1.0 : 0.0));
    for (double t : p0.T) CHECK(t == 0.0);

    for (const auto& pose : ep.poses) {
        // R^T R = I within 1e-9; det(R) = 1 within 1e-9
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k)
                    acc += pose.R[static_cast<size_t>(k * 3 + i)] * pose.R[static_cast<size_t>(k * 3 + j)];
                CHECK(std::abs(acc - (i == j ? 1.0 : 0.0)) < 1e-9);
            }
        const auto& R = pose.R;
        const double det = R[0] * (R[4] * R[8] - R[5] * R[7]) - R[1] * (R[3] * R[8] - R[5] * R[6]) +
                           R[2] * (R[3] * R[7] - R[4] * R[6]);
        CHECK(std::abs(det - 1.0) < 1e-9);
    }

    for (size_t t = 1; t < ep.poses.size(); ++t) {
        const auto a = camera_center(ep.poses[t - 1]);
        const auto b = camera_center(ep.poses[t]);
        const double step = std::hypot(b[0] - a[0], b[1] - a[1], b[2] - a[2]);
        CHECK(step <= p.ego_speed_max + 1e-9);
    }
}

TEST_CASE("descriptor_of is deterministic and separates obstacle counts") {
    toyworld::WorldParams p = params_with_seed(3);
    toyworld::SceneState s;
    s.tint_r = 0.9;
    s.tint_g = 0.85;
    s.tint_b = 1.0;
    s.obstacle_count = 4;
    s.mean_speed = 1.1;
    s.num_layers = 3;

    auto a = toyworld::descriptor_of(p, s);
    auto b = toyworld::descriptor_of(p, s);
    CHECK(bitwise_equal(a, b));
    CHECK(a.size() == 32);

    toyworld::SceneState s2 = s;
    s2.obstacle_count = 5;
    auto c = toyworld::descriptor_of(p, s2);
    bool differs = false;
    for (std::int64_t i = 0; i < a.size(); ++i) differs = differs || a[i] != c[i];
    CHECK(differs);
}

TEST_CASE("split_dataset partitions deterministically") {
    std::vector<toyworld::Episode> eps;
    for (int i = 0; i < 10; ++i) eps.push_back(toyworld::gen_episode(params_with_seed(static_cast<std::uint64_t>(i)), 2));

    auto [train, val] = toyworld::split_dataset(eps, 0.8, 99);
    CHECK(train.size() == 8);
    CHECK(val.size() == 2);

    // Same seed gives the identical partition (compare by frame digests).
    auto [train2, val2] = toyworld::split_dataset(eps, 0.8, 99);
    for (size_t i = 0; i < train.size(); ++i)
        CHECK(fnv1a(train[i].frames[0].rgb.data(), train[i].frames[0].rgb.size() * sizeof(float)) ==
              fnv1a(train2[i].frames[0].rgb.data(), train2[i].frames[0].rgb.size() * sizeof(float)));

    // Disjoint partition: all 10 digests present exactly once.
    std::vector<std::uint64_t> digests;
    for (const auto& e : train) digests.push_back(fnv1a(e.frames[0].rgb.data(), e.frames[0].rgb.size() * sizeof(float)));
    for (const auto& e : val) digests.push_back(fnv1a(e.frames[0].rgb.data(), e.frames[0].rgb.size() * sizeof(float)));
    std::sort(digests.begin(), digests.end());
    CHECK(std::adjacent_find(digests.begin(), digests.end()) == digests.end());
}

TEST_CASE("split_dataset 2 episodes at ratio 0.5 gives 1/1") {
    std::vector<toyworld::Episode> eps;
    eps.push_back(toyworld::gen_episode(params_with_seed(1), 2));
    eps.push_back(toyworld::gen_episode(params_with_seed(2), 2));
    auto [train, val] = toyworld::split_dataset(eps, 0.5, 7);
    CHECK(train.size() == 1);
    CHECK(val.size() == 1);
}

TEST_CASE("split_dataset rejects empty input") {
    std::vector<toyworld::Episode> eps;
    CHECK_THROWS(toyworld::split_dataset(eps, 0.5, 7));
}
