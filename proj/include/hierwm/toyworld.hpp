#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hierwm/tensor.hpp"
#include "hierwm/trajwarp.hpp"
#include "hierwm/types.hpp"

namespace hierwm::toyworld {

inline constexpr int kDescriptorDim = 32;

// Procedural 2.5D driving world: scrolling road with dashed centerline,
// depth-scaled parallax background layers and box obstacles on the road
// plane. Deterministic in (params, length).
struct WorldParams {
    int image_height = 64;
    int image_width = 64;
    int num_layers = 3;
    int num_obstacles = 4;
    double ego_speed_min = 0.5;  // world units per frame
    double ego_speed_max = 1.5;
    std::uint64_t seed = 7;

    void validate() const;
};

// Scene parameters summarized into the fixed-length conditioning vector.
struct SceneState {
    double tint_r = 1.0, tint_g = 1.0, tint_b = 1.0;  // weather tint
    int obstacle_count = 0;
    double mean_speed = 0.0;
    int num_layers = 0;
};

struct Episode {
    std::vector<Frame> frames;
    std::vector<trajwarp::CameraPose> poses;  // frame-0-relative, one per frame
    Tensor descriptor;                        // [kDescriptorDim]
    double frame_period = 0.1;                // seconds per frame
};

Episode gen_episode(const WorldParams& params, int length);

Tensor descriptor_of(const WorldParams& params, const SceneState& state);

// Seeded shuffle, then |train| = round(ratio * N). Partition is disjoint.
std::pair<std::vector<Episode>, std::vector<Episode>> split_dataset(std::vector<Episode> episodes,
                                                                    double ratio, std::uint64_t seed);

}  // namespace hierwm::toyworld
