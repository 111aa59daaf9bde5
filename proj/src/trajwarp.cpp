#include "hierwm/trajwarp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hierwm::trajwarp {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    return {v[0] / n, v[1] / n, v[2] / n};
}

// Clamped knot vector for n control points of the given degree, over [0, 1].
std::vector<double> clamped_knots(int n, int degree) {
    std::vector<double> knots;
    for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
    const int internal = n - degree - 1;
    for (int i = 1; i <= internal; ++i)
        knots.push_back(static_cast<double>(i) / (internal + 1));
    for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
    return knots;
}

// de Boor evaluation of the spline defined by 2D control points.
std::array<double, 2> de_boor(const std::vector<std::array<double, 2>>& ctrl,
                              const std::vector<double>& knots, int degree, double u) {
    const int n = static_cast<int>(ctrl.size());
    int span = degree;
    while (span < n - 1 && u >= knots[static_cast<size_t>(span + 1)]) ++span;

    std::vector<std::array<double, 2>> d(static_cast<size_t>(degree + 1));
    for (int j = 0; j <= degree; ++j) d[static_cast<size_t>(j)] = ctrl[static_cast<size_t>(span - degree + j)];
    for (int r = 1; r <= degree; ++r)
        for (int j = degree; j >= r; --j) {
            const int i = span - degree + j;
            const double den = knots[static_cast<size_t>(i + degree - r + 1)] - knots[static_cast<size_t>(i)];
            const double a = den == 0.0 ? 0.0 : (u - knots[static_cast<size_t>(i)]) / den;
            d[static_cast<size_t>(j)] = {(1.0 - a) * d[static_cast<size_t>(j - 1)][0] + a * d[static_cast<size_t>(j)][0],
                                         (1.0 - a) * d[static_cast<size_t>(j - 1)][1] + a * d[static_cast<size_t>(j)][1]};
        }
    return d[static_cast<size_t>(degree)];
}

}  // namespace

void TrajectorySpec::validate() const {
    if (waypoints.size() < 2) throw std::invalid_argument("TrajectorySpec: need at least 2 waypoints");
    if (waypoints.size() > 5) throw std::invalid_argument("TrajectorySpec: at most 5 waypoints");
    if (num_frames < 2) throw std::invalid_argument("TrajectorySpec: num_frames must be >= 2");
    for (const auto& w : waypoints)
        if (!std::isfinite(w[0]) || !std::isfinite(w[1]))
            throw std::invalid_argument("TrajectorySpec: non-finite waypoint");
}

void Intrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("Intrinsics: focal lengths must be positive");
}

Intrinsics default_intrinsics(int image_height, int image_width) {
    Intrinsics k;
    k.fx = k.fy = static_cast<double>(image_width);
    k.cx = image_width / 2.0;
    k.cy = image_height / 2.0;
    return k;
}

std::vector<Vec3> interp_trajectory(const TrajectorySpec& spec) {
    spec.validate();
    const int n = static_cast<int>(spec.waypoints.size());
    const int degree = std::min(3, n - 1);
    const auto knots = clamped_knots(n, degree);

    std::vector<Vec3> out;
    out.reserve(static_cast<size_t>(spec.num_frames));
    for (int i = 0; i < spec.num_frames; ++i) {
        const double u = static_cast<double>(i) / (spec.num_frames - 1);
        const auto p = de_boor(spec.waypoints, knots, degree, u);
        out.push_back({p[0], 0.0, p[1]});
    }
    // Clamped spline endpoints are the first/last control points; pin them so
    // endpoint interpolation is exact rather than within rounding.
    out.front() = {spec.waypoints.front()[0], 0.0, spec.waypoints.front()[1]};
    out.back() = {spec.waypoints.back()[0], 0.0, spec.waypoints.back()[1]};
    return out;
}

std::vector<CameraPose> poses_from_trajectory(const std::vector<Vec3>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 2) throw std::invalid_argument("poses_from_trajectory: need at least 2 points");

    auto diff = [&](int a, int b) -> Vec3 {
        return {points[static_cast<size_t>(a)][0] - points[static_cast<size_t>(b)][0],
                points[static_cast<size_t>(a)][1] - points[static_cast<size_t>(b)][1],
                points[static_cast<size_t>(a)][2] - points[static_cast<size_t>(b)][2]};
    };

    for (int i = 1; i < n; ++i)
        if (norm(diff(i, i - 1)) < 1e-12)
            throw std::invalid_argument("poses_from_trajectory: zero-length tangent at frame " +
                                        std::to_string(i));

    std::vector<Vec3> tangents(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Vec3 t;
        if (i > 0 && i < n - 1) {
            t = diff(i + 1, i - 1);
        } else if (n >= 3) {
            // Second-order one-sided difference at the ends.
            if (i == 0) {
                const Vec3 d1 = diff(1, 0), d2 = diff(2, 0);
                t = {2.0 * d1[0] - 0.5 * d2[0], 2.0 * d1[1] - 0.5 * d2[1], 2.0 * d1[2] - 0.5 * d2[2]};
            } else {
                const Vec3 d1 = diff(n - 1, n - 2), d2 = diff(n - 1, n - 3);
                t = {2.0 * d1[0] - 0.5 * d2[0], 2.0 * d1[1] - 0.5 * d2[1], 2.0 * d1[2] - 0.5 * d2[2]};
            }
        } else {
            t = diff(1, 0);
        }
        if (norm(t) < 1e-12)
            throw std::invalid_argument("poses_from_trajectory: zero-length tangent at frame " +
                                        std::to_string(i));
        tangents[static_cast<size_t>(i)] = normalized(t);
    }

    // World-to-camera axes per frame: rows right / up / forward.
    auto axes = [&](int i) {
        const Vec3& f = tangents[static_cast<size_t>(i)];
        const Vec3 up{0.0, 1.0, 0.0};
        const Vec3 r = normalized(cross(up, f));
        const Vec3 u = cross(f, r);
        return std::array<double, 9>{r[0], r[1], r[2], u[0], u[1], u[2], f[0], f[1], f[2]};
    };

    const auto a0 = axes(0);
    const Vec3 c0 = points[0];
    std::vector<CameraPose> poses(static_cast<size_t>(n));
    for (int i = 1; i < n; ++i) {
        const auto ai = axes(i);
        CameraPose& p = poses[static_cast<size_t>(i)];
        // R = A_i * A_0^T ; T = A_i * (C_0 - C_i)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k) acc += ai[static_cast<size_t>(r * 3 + k)] * a0[static_cast<size_t>(c * 3 + k)];
                p.R[static_cast<size_t>(r * 3 + c)] = acc;
            }
        const Vec3 dc{c0[0] - points[static_cast<size_t>(i)][0], c0[1] - points[static_cast<size_t>(i)][1],
                      c0[2] - points[static_cast<size_t>(i)][2]};
        for (int r = 0; r < 3; ++r)
            p.T[static_cast<size_t>(r)] = ai[static_cast<size_t>(r * 3)] * dc[0] +
                                          ai[static_cast<size_t>(r * 3 + 1)] * dc[1] +
                                          ai[static_cast<size_t>(r * 3 + 2)] * dc[2];
    }
    return poses;  // poses[0] stays the identity
}

CameraPose relative_pose(const CameraPose& target, const CameraPose& base) {
    // X_t = R_t X_0 + T_t and X_b = R_b X_0 + T_b give
    // X_t = (R_t R_b^T) X_b + (T_t - R_t R_b^T T_b).
    CameraPose rel;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k)
                acc += target.R[static_cast<size_t>(r * 3 + k)] * base.R[static_cast<size_t>(c * 3 + k)];
            rel.R[static_cast<size_t>(r * 3 + c)] = acc;
        }
    for (int r = 0; r < 3; ++r) {
        double acc = target.T[static_cast<size_t>(r)];
        for (int k = 0; k < 3; ++k)
            acc -= rel.R[static_cast<size_t>(r * 3 + k)] * base.T[static_cast<size_t>(k)];
        rel.T[static_cast<size_t>(r)] = acc;
    }
    return rel;
}

Projected project_pixel(double u, double v, const CameraPose& pose, const Intrinsics& intr, double d) {
    intr.validate();
    if (!(d > 0.0)) throw std::invalid_argument("project_pixel: depth must be positive");
    const Vec3 x0{(u - intr.cx) / intr.fx * d, (v - intr.cy) / intr.fy * d, d};
    const Vec3 xt = pose.apply(x0);
    Projected p;
    p.z = xt[2];
    if (xt[2] > 0.0) {
        p.u = intr.fx * xt[0] / xt[2] + intr.cx;
        p.v = intr.fy * xt[1] / xt[2] + intr.cy;
    }
    return p;
}

WarpResult warp_frame(const Frame& frame, const CameraPose& pose, const Intrinsics& intr, double d) {
    WarpResult res;
    res.frame = Frame(frame.h, frame.w);
    res.mask.assign(static_cast<size_t>(frame.h) * frame.w, 1);
    std::vector<double> zbuf(static_cast<size_t>(frame.h) * frame.w, 1e300);

    for (int v = 0; v < frame.h; ++v)
        for (int u = 0; u < frame.w; ++u) {
            const Projected p = project_pixel(u, v, pose, intr, d);
            if (p.z <= 0.0) continue;
            const long ui = std::lround(p.u);
            const long vi = std::lround(p.v);
            if (ui < 0 || ui >= frame.w || vi < 0 || vi >= frame.h) continue;
            const size_t at = static_cast<size_t>(vi) * frame.w + static_cast<size_t>(ui);
            if (p.z < zbuf[at]) {
                zbuf[at] = p.z;
                res.mask[at] = 0;
                for (int c = 0; c < 3; ++c)
                    res.frame.at(static_cast<int>(vi), static_cast<int>(ui), c) = frame.at(v, u, c);
            }
        }
    return res;
}

Frame inpaint(const Frame& frame, const std::vector<std::uint8_t>& mask) {
    if (mask.size() != static_cast<size_t>(frame.h) * frame.w)
        throw std::invalid_argument("inpaint: mask shape mismatch");
    size_t holes = 0;
    for (auto m : mask) holes += m ? 1 : 0;
    if (holes == mask.size()) throw std::invalid_argument("inpaint: fully masked frame");
    if (holes == 0) return frame;

    const int h = frame.h, w = frame.w;
    // Seed holes with the mean of the known pixels so every iterate stays
    // inside the known value range (maximum principle).
    std::vector<double> cur(static_cast<size_t>(h) * w * 3);
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (int i = 0; i < h * w; ++i)
            if (!mask[static_cast<size_t>(i)]) mean += frame.rgb[static_cast<size_t>(i) * 3 + c];
        mean /= static_cast<double>(mask.size() - holes);
        for (int i = 0; i < h * w; ++i)
            cur[static_cast<size_t>(i) * 3 + c] =
                mask[static_cast<size_t>(i)] ? mean : frame.rgb[static_cast<size_t>(i) * 3 + c];
    }

    std::vector<double> next = cur;
    const int max_iters = 2000;
    const double tol = 1e-4;
    for (int iter = 0; iter < max_iters; ++iter) {
        double max_delta = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_delta)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t at = static_cast<size_t>(y) * w + x;
                if (!mask[at]) continue;
                for (int c = 0; c < 3; ++c) {
                    double acc = 0.0;
                    int cnt = 0;
                    if (y > 0) acc += cur[(at - w) * 3 + c], ++cnt;
                    if (y < h - 1) acc += cur[(at + w) * 3 + c], ++cnt;
                    if (x > 0) acc += cur[(at - 1) * 3 + c], ++cnt;
                    if (x < w - 1) acc += cur[(at + 1) * 3 + c], ++cnt;
                    const double v = acc / cnt;
                    max_delta = std::max(max_delta, std::abs(v - cur[at * 3 + c]));
                    next[at * 3 + c] = v;
                }
            }
        std::swap(cur, next);
        if (max_delta <= tol) break;
    }

    Frame out = frame;
    for (int i = 0; i < h * w; ++i)
        if (mask[static_cast<size_t>(i)])
            for (int c = 0; c < 3; ++c)
                out.rgb[static_cast<size_t>(i) * 3 + c] = static_cast<float>(cur[static_cast<size_t>(i) * 3 + c]);
    return out;
}

WarpSequence warp_sequence(const Frame& frame0, const TrajectorySpec& spec, const Intrinsics& intr,
                           double d) {
    const auto points = interp_trajectory(spec);
    const auto poses = poses_from_trajectory(points);

    WarpSequence seq;
    seq.frames.resize(poses.size());
    seq.masks.resize(poses.size());
    seq.frames[0] = frame0;
    seq.masks[0].assign(static_cast<size_t>(frame0.h) * frame0.w, 0);

#pragma omp parallel for schedule(dynamic)
    for (int i = 1; i < static_cast<int>(poses.size()); ++i) {
        WarpResult wr = warp_frame(frame0, poses[static_cast<size_t>(i)], intr, d);
        seq.frames[static_cast<size_t>(i)] = inpaint(wr.frame, wr.mask);
        seq.masks[static_cast<size_t>(i)] = std::move(wr.mask);
    }
    return seq;
}

}  // namespace hierwm::trajwarp
