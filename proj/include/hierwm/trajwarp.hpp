#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hierwm/types.hpp"

namespace hierwm::trajwarp {

using Vec3 = std::array<double, 3>;

// Waypoints on the ground plane (x right, z forward, meters). The camera path
// through them is a clamped B-spline sampled at num_frames uniform parameters.
struct TrajectorySpec {
    std::vector<std::array<double, 2>> waypoints;  // (x, z), 2 to 5 points
    int num_frames = 25;

    void validate() const;
};

// Rigid transform taking frame-0 camera coordinates to frame-t camera
// coordinates: X_t = R * X_0 + T. Frame 0 is the identity.
struct CameraPose {
    std::array<double, 9> R{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
    std::array<double, 3> T{0, 0, 0};

    Vec3 apply(const Vec3& x) const {
        return {R[0] * x[0] + R[1] * x[1] + R[2] * x[2] + T[0],
                R[3] * x[0] + R[4] * x[1] + R[5] * x[2] + T[1],
                R[6] * x[0] + R[7] * x[1] + R[8] * x[2] + T[2]};
    }
};

struct Intrinsics {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;

    void validate() const;
};

Intrinsics default_intrinsics(int image_height, int image_width);  // fx = fy = W, principal center

// Clamped B-spline (cubic, degree reduced for short waypoint lists) sampled
// at num_frames uniform parameters; y is identically 0. Endpoints interpolate
// the first and last waypoints exactly.
std::vector<Vec3> interp_trajectory(const TrajectorySpec& spec);

// Per-point camera pose with the camera plane perpendicular to the curve:
// forward = normalized tangent (second-order finite differences), up = +y.
// Throws when consecutive points coincide (zero tangent), naming the frame.
std::vector<CameraPose> poses_from_trajectory(const std::vector<Vec3>& points);

// Pose taking base's camera coordinates to target's camera coordinates, when
// both are expressed relative to the same reference frame.
CameraPose relative_pose(const CameraPose& target, const CameraPose& base);

// Continuous reprojection of source pixel (u, v) under uniform depth d.
// Returns the target pixel coordinates and the transformed depth.
struct Projected {
    double u = 0.0, v = 0.0, z = 0.0;
};
Projected project_pixel(double u, double v, const CameraPose& pose, const Intrinsics& intr, double d);

// Forward-splat warp at uniform depth with z-buffering. mask is 1 where no
// source pixel landed (hole to inpaint).
struct WarpResult {
    Frame frame;
    std::vector<std::uint8_t> mask;
};
WarpResult warp_frame(const Frame& frame, const CameraPose& pose, const Intrinsics& intr, double d);

// Harmonic (Laplace) diffusion fill of masked pixels from unmasked boundary
// values; tolerance 1e-4, at most 2000 sweeps. Unmasked pixels are unchanged.
Frame inpaint(const Frame& frame, const std::vector<std::uint8_t>& mask);

struct WarpSequence {
    std::vector<Frame> frames;
    std::vector<std::vector<std::uint8_t>> masks;
};

// interp_trajectory -> poses_from_trajectory -> warp_frame -> inpaint, one
// output per trajectory sample; frame 0 is the input frame itself.
WarpSequence warp_sequence(const Frame& frame0, const TrajectorySpec& spec, const Intrinsics& intr,
                           double d);

}  // namespace hierwm::trajwarp
