#include <doctest.h>

#include <cmath>

#include "hierwm/trajwarp.hpp"

using namespace hierwm;
using trajwarp::Vec3;

namespace {

// Independent B-spline oracle: Cox-de Boor basis recursion (a different
// algorithm from the de Boor point evaluation in the implementation).
double basis(int i, int p, double u, const std::vector<double>& knots) {
    if (p == 0) {
        const bool last = u >= knots[knots.size() - 1] && knots[static_cast<size_t>(i + 1)] >= knots[knots.size() - 1];
        return ((u >= knots[static_cast<size_t>(i)] && u < knots[static_cast<size_t>(i + 1)]) || (last && u >= knots[static_cast<size_t>(i)])) ? 1.0 : 0.0;
    }
    double left = 0.0, right = 0.0;
    const double dl = knots[static_cast<size_t>(i + p)] - knots[static_cast<size_t>(i)];
    if (dl > 0.0) left = (u - knots[static_cast<size_t>(i)]) / dl * basis(i, p - 1, u, knots);
    const double dr = knots[static_cast<size_t>(i + p + 1)] - knots[static_cast<size_t>(i + 1)];
    if (dr > 0.0) right = (knots[static_cast<size_t>(i + p + 1)] - u) / dr * basis(i + 1, p - 1, u, knots);
    return left + right;
}

std::array<double, 2> spline_oracle(const std::vector<std::array<double, 2>>& ctrl, double u) {
    const int n = static_cast<int>(ctrl.size());
    const int degree = std::min(3, n - 1);
    std::vector<double> knots;
    for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
    const int internal = n - degree - 1;
    for (int i = 1; i <= internal; ++i) knots.push_back(static_cast<double>(i) / (internal + 1));
    for (int i = 0; i <= degree; ++i) knots.push_back(1.0);

    std::array<double, 2> acc{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const double b = basis(i, degree, u, knots);
        acc[0] += b * ctrl[static_cast<size_t>(i)][0];
        acc[1] += b * ctrl[static_cast<size_t>(i)][1];
    }
    return acc;
}

}  // namespace

TEST_CASE("collinear waypoints stay on the line with increasing z") {
    trajwarp::TrajectorySpec spec;
    spec.waypoints = {{0, 0}, {0, 5}, {0, 10}};
    spec.num_frames = 25;
    auto pts = trajwarp::interp_trajectory(spec);
    REQUIRE(pts.size() == 25);
    for (size_t i = 0; i < pts.size(); ++i) {
        CHECK(std::abs(pts[i][0]) < 1e-12);
        CHECK(pts[i][1] == 0.0);
        if (i > 0) CHECK(pts[i][2] > pts[i - 1][2]);
    }
}

TEST_CASE("spline endpoints interpolate the first and last waypoints exactly") {
    trajwarp::TrajectorySpec spec;
    spec.waypoints = {{0, 0}, {1, 2}, {3, 4}, {4, 8}};
    spec.num_frames = 25;
    auto pts = trajwarp::interp_trajectory(spec);
    CHECK(std::abs(pts.front()[0] - 0.0) < 1e-9);
    CHECK(std::abs(pts.front()[2] - 0.0) < 1e-9);
    CHECK(std::abs(pts.back()[0] - 4.0) < 1e-9);
    CHECK(std::abs(pts.back()[2] - 8.0) < 1e-9);
}

TEST_CASE("spline samples match the Cox-de Boor oracle") {
    trajwarp::TrajectorySpec spec;
    spec.waypoints = {{0, 0}, {1, 2}, {3, 4}, {4, 8}};
    spec.num_frames = 25;
    auto pts = trajwarp::interp_trajectory(spec);
    for (int i = 0; i < 25; ++i) {
        const double u = static_cast<double>(i) / 24.0;
        const auto expect = spline_oracle(spec.waypoints, u);
        CHECK(std::abs(pts[static_cast<size_t>(i)][0] - expect[0]) < 1e-9);
        CHECK(std::abs(pts[static_cast<size_t>(i)][2] - expect[1]) < 1e-9);
    }
}

TEST_CASE("interp_trajectory rejects bad specs") {
    trajwarp::TrajectorySpec spec;
    spec.waypoints = {{0, 0}};
    CHECK_THROWS(trajwarp::interp_trajectory(spec));
    spec.waypoints = {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}};
    CHECK_THROWS(trajwarp::interp_trajectory(spec));
}

TEST_CASE("straight-ahead trajectory gives R = I and T = (0, 0, -z_t)") {
    std::vector<Vec3> pts;
    for (int t = 0; t < 10; ++t) pts.push_back({0.0, 0.0, static_cast<double>(t)});
    auto poses = trajwarp::poses_from_trajectory(pts);
    REQUIRE(poses.size() == 10);
    for (size_t t = 0; t < poses.size(); ++t) {
        for (int i = 0; i < 9; ++i)
            CHECK(poses[t].R[static_cast<size_t>(i)] == doctest::Approx(i % 4 == 0 ? 1.0 : 0.0).epsilon(1e-12));
        CHECK(poses[t].T[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(poses[t].T[1] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(poses[t].T[2] == doctest::Approx(-static_cast<double>(t)).epsilon(1e-12));
    }
}

TEST_CASE("frame 0 pose is the exact identity") {
    std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 2}, {3, 0, 3}};
    auto poses = trajwarp::poses_from_trajectory(pts);
    for (int i = 0; i < 9; ++i) CHECK(poses[0].R[static_cast<size_t>(i)] == (i % 4 == 0 ? 1.0 : 0.0));
    for (double t : poses[0].T) CHECK(t == 0.0);
}

TEST_CASE("90 degree planar turn ends in a 90 degree yaw rotation") {
    // Dense quarter circle: x = r - r cos(theta), z = r sin(theta).
    const int n = 2001;
    const double r = 5.0;
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) {
        const double th = M_PI / 2.0 * i / (n - 1);
        pts.push_back({r - r * std::cos(th), 0.0, r * std::sin(th)});
    }
    auto poses = trajwarp::poses_from_trajectory(pts);
    // Analytic tangent at the end is +x; world-to-camera axes give
    // R = [[0,0,-1],[0,1,0],[1,0,0]] (yaw of 90 degrees).
    const std::array<double, 9> expect{0, 0, -1, 0, 1, 0, 1, 0, 0};
    for (int i = 0; i < 9; ++i)
        CHECK(std::abs(poses.back().R[static_cast<size_t>(i)] - expect[static_cast<size_t>(i)]) < 1e-6);
}

TEST_CASE("rotation validity across arbitrary planar trajectories") {
    std::vector<Vec3> pts;
    for (int t = 0; t < 50; ++t)
        pts.push_back({2.0 * std::sin(0.1 * t), 0.0, 1.5 * t + 0.3 * std::cos(0.2 * t)});
    for (const auto& pose : trajwarp::poses_from_trajectory(pts)) {
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
}

TEST_CASE("coincident consecutive points report the offending frame") {
    std::vector<Vec3> pts = {{0, 0, 0}, {0, 0, 0}, {0, 0, 2}};
    CHECK_THROWS_WITH_AS(trajwarp::poses_from_trajectory(pts),
                         doctest::Contains("zero-length tangent"), std::invalid_argument);
}

TEST_CASE("identity pose warps to the identical frame with an empty mask") {
    Frame f(32, 32);
    for (size_t i = 0; i < f.rgb.size(); ++i) f.rgb[i] = static_cast<float>((i * 2654435761u % 1000) / 1000.0);
    trajwarp::CameraPose identity;
    auto intr = trajwarp::default_intrinsics(32, 32);
    auto res = trajwarp::warp_frame(f, identity, intr, 10.0);
    CHECK(bitwise_equal(res.frame, f));
    for (auto m : res.mask) CHECK(m == 0);
}

TEST_CASE("forward motion scales about the principal point by d/(d - delta)") {
    trajwarp::CameraPose pose;
    pose.T = {0.0, 0.0, -2.0};
    trajwarp::Intrinsics intr{100.0, 100.0, 50.0, 50.0};
    auto p = trajwarp::project_pixel(60.0, 50.0, pose, intr, 10.0);
    // Closed form: u' = cx + (u - cx) * d/(d-2) = 50 + 10 * 1.25 = 62.5
    CHECK(std::abs(p.u - 62.5) < 1e-6);
    CHECK(std::abs(p.v - 50.0) < 1e-6);
    CHECK(p.z == doctest::Approx(8.0));
}

TEST_CASE("pure yaw warp field matches the homography K R K^-1 within 0.5 px") {
    const double yaw = 0.15;
    trajwarp::CameraPose pose;
    pose.R = {std::cos(yaw), 0, -std::sin(yaw), 0, 1, 0, std::sin(yaw), 0, std::cos(yaw)};
    trajwarp::Intrinsics intr{64.0, 64.0, 32.0, 32.0};

    for (int v = 0; v < 64; v += 7)
        for (int u = 0; u < 64; u += 7) {
            auto p = trajwarp::project_pixel(u, v, pose, intr, 10.0);
            if (p.z <= 0.0) continue;
            // Homography: x = K R K^-1 [u, v, 1]^T, independent of depth when T = 0.
            const double xr = (u - intr.cx) / intr.fx;
            const double yr = (v - intr.cy) / intr.fy;
            const double hx = pose.R[0] * xr + pose.R[1] * yr + pose.R[2];
            const double hy = pose.R[3] * xr + pose.R[4] * yr + pose.R[5];
            const double hz = pose.R[6] * xr + pose.R[7] * yr + pose.R[8];
            const double hu = intr.fx * hx / hz + intr.cx;
            const double hv = intr.fy * hy / hz + intr.cy;
            CHECK(std::abs(p.u - hu) < 0.5);
            CHECK(std::abs(p.v - hv) < 0.5);
        }
}

TEST_CASE("inpaint: empty mask is the identity") {
    Frame f(8, 8);
    for (size_t i = 0; i < f.rgb.size(); ++i) f.rgb[i] = static_cast<float>(i % 7) / 7.0f;
    std::vector<std::uint8_t> mask(64, 0);
    CHECK(bitwise_equal(trajwarp::inpaint(f, mask), f));
}

TEST_CASE("inpaint: single hole surrounded by 0.5 fills to 0.5") {
    Frame f(5, 5);
    for (auto& v : f.rgb) v = 0.5f;
    std::vector<std::uint8_t> mask(25, 0);
    mask[12] = 1;
    Frame out = trajwarp::inpaint(f, mask);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(out.at(2, 2, c) - 0.5f) < 1e-4);
}

TEST_CASE("inpaint: vertical strip between 0 and 1 fills monotonically") {
    const int h = 8, w = 12;
    Frame f(h, w);
    std::vector<std::uint8_t> mask(static_cast<size_t>(h) * w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool hole = x >= 4 && x < 8;
            if (hole) mask[static_cast<size_t>(y) * w + x] = 1;
            const float v = x < 4 ? 0.0f : 1.0f;
            for (int c = 0; c < 3; ++c) f.at(y, x, c) = hole ? 0.0f : v;
        }
    Frame out = trajwarp::inpaint(f, mask);
    for (int y = 0; y < h; ++y)
        for (int x = 4; x <= 8; ++x)
            CHECK(out.at(y, x, 0) >= out.at(y, x - 1, 0) - 1e-5f);
}

TEST_CASE("inpaint maximum principle: filled values stay within the known range") {
    Frame f(10, 10);
    std::vector<std::uint8_t> mask(100, 0);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            const bool hole = y >= 3 && y < 7 && x >= 3 && x < 7;
            mask[static_cast<size_t>(y) * 10 + x] = hole ? 1 : 0;
            for (int c = 0; c < 3; ++c)
                f.at(y, x, c) = hole ? 0.0f : 0.2f + 0.6f * static_cast<float>((x + y) % 5) / 4.0f;
        }
    Frame out = trajwarp::inpaint(f, mask);
    for (int y = 3; y < 7; ++y)
        for (int x = 3; x < 7; ++x)
            for (int c = 0; c < 3; ++c) {
                CHECK(out.at(y, x, c) >= 0.2f - 1e-4f);
                CHECK(out.at(y, x, c) <= 0.8f + 1e-4f);
            }
}

TEST_CASE("inpaint rejects fully masked frames") {
    Frame f(4, 4);
    std::vector<std::uint8_t> mask(16, 1);
    CHECK_THROWS(trajwarp::inpaint(f, mask));
}

TEST_CASE("warp_sequence basics") {
    Frame f(32, 32);
    for (size_t i = 0; i < f.rgb.size(); ++i)
        f.rgb[i] = static_cast<float>((i * 131u % 997) / 997.0);
    auto intr = trajwarp::default_intrinsics(32, 32);

    SUBCASE("N = 25 produces 25 frames and frame 0 is the input") {
        trajwarp::TrajectorySpec spec;
        spec.waypoints = {{0, 0}, {0.5, 4}, {1.0, 9}};
        spec.num_frames = 25;
        auto seq = trajwarp::warp_sequence(f, spec, intr, 10.0);
        CHECK(seq.frames.size() == 25);
        CHECK(bitwise_equal(seq.frames[0], f));
    }
    SUBCASE("zero-motion trajectory is rejected via the tangent contract") {
        trajwarp::TrajectorySpec spec;
        spec.waypoints = {{1, 1}, {1, 1}};
        spec.num_frames = 5;
        CHECK_THROWS(trajwarp::warp_sequence(f, spec, intr, 10.0));
    }
    SUBCASE("straight forward trajectory zooms monotonically") {
        trajwarp::TrajectorySpec spec;
        spec.waypoints = {{0, 0}, {0, 3}, {0, 6}};
        spec.num_frames = 10;
        auto pts = trajwarp::interp_trajectory(spec);
        auto poses = trajwarp::poses_from_trajectory(pts);
        double prev = 0.0;
        for (size_t t = 1; t < poses.size(); ++t) {
            auto p = trajwarp::project_pixel(24.0, 16.0, poses[t], intr, 10.0);
            const double off = std::abs(p.u - intr.cx);
            CHECK(off > prev);
            prev = off;
        }
    }
}
