#include "hierwm/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hierwm/rng.hpp"

namespace hierwm::toyworld {

namespace {

struct Obstacle {
    double lane;   // lateral offset in world units
    double z;      // forward position in world units
    double speed;  // own forward speed per frame
    double size;
    float r, g, b;
};

struct Layer {
    double amp;        // skyline amplitude in rows
    double freq;       // spatial frequency
    double phase;
    double parallax;   // fraction of ego motion seen by this layer
    float r, g, b;
};

struct World {
    SceneState scene;
    std::vector<Obstacle> obstacles;
    std::vector<Layer> layers;
    double steer_amp;
    double steer_freq;
    double speed_phase;
    double speed_freq;
    double road_half_width;
    double wrap_z;  // obstacles recycle over this distance
};

World build_world(const WorldParams& p) {
    Rng rng(derive_seed(p.seed, {0x7066}));
    World w;
    w.scene.tint_r = 0.8 + 0.2 * rng.uniform();
    w.scene.tint_g = 0.8 + 0.2 * rng.uniform();
    w.scene.tint_b = 0.8 + 0.2 * rng.uniform();
    w.scene.obstacle_count = p.num_obstacles;
    w.scene.num_layers = p.num_layers;

    w.steer_amp = 0.15 + 0.2 * rng.uniform();
    w.steer_freq = 0.02 + 0.04 * rng.uniform();
    w.speed_phase = rng.uniform() * 6.28318530717958647692;
    w.speed_freq = 0.01 + 0.03 * rng.uniform();
    w.road_half_width = 2.0;
    w.wrap_z = 48.0;

    for (int i = 0; i < p.num_layers; ++i) {
        Layer l;
        const double depth = static_cast<double>(i + 1);  // 1 = nearest
        l.amp = (0.06 + 0.05 * rng.uniform()) * p.image_height / depth;
        l.freq = 0.05 + 0.15 * rng.uniform();
        l.phase = rng.uniform() * 6.28318530717958647692;
        l.parallax = 0.9 / depth;
        const float shade = static_cast<float>(0.25 + 0.5 * (depth / (p.num_layers + 1.0)));
        l.r = shade * 0.5f;
        l.g = shade * 0.8f;
        l.b = shade * 0.6f;
        w.layers.push_back(l);
    }

    for (int i = 0; i < p.num_obstacles; ++i) {
        Obstacle o;
        o.lane = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.4 + 0.9 * rng.uniform());
        o.z = 4.0 + rng.uniform() * (w.wrap_z - 8.0);
        o.speed = 0.05 + 0.25 * rng.uniform();
        o.size = 0.5 + 0.5 * rng.uniform();
        o.r = static_cast<float>(0.5 + 0.5 * rng.uniform());
        o.g = static_cast<float>(0.2 + 0.5 * rng.uniform());
        o.b = static_cast<float>(0.2 + 0.5 * rng.uniform());
        w.obstacles.push_back(o);
    }
    return w;
}

inline float clamp01(double v) { return static_cast<float>(std::min(1.0, std::max(0.0, v))); }

// Renders the view at ego state (x, z, heading). Pseudo-perspective: rows
// below the horizon map to ground distance, obstacle scale falls off with
// inverse depth.
void render(const WorldParams& p, const World& w, double ego_x, double ego_z, double heading,
            Frame& frame) {
    const int H = p.image_height, W = p.image_width;
    const double horizon = 0.42 * H;
    const double focal = static_cast<double>(W);

    for (int y = 0; y < H; ++y) {
        const bool sky = y < horizon;
        for (int x = 0; x < W; ++x) {
            float r, g, b;
            if (sky) {
                const double t = y / horizon;
                r = clamp01((0.35 + 0.35 * t) * w.scene.tint_r);
                g = clamp01((0.55 + 0.25 * t) * w.scene.tint_g);
                b = clamp01((0.85 - 0.15 * t) * w.scene.tint_b);
            } else {
                // Ground: grass with a perspective road band about the center.
                const double depth = 0.8 * H / (y - horizon + 1.0);  // world units
                const double lateral_span = depth * (W / focal);
                const double wx = ego_x + heading * depth + (x - W / 2.0) / (W / 2.0) * lateral_span;
                const double rel = wx - ego_x;  // lateral offset from road center
                if (std::abs(rel) < w.road_half_width) {
                    const float road = 0.30f + 0.05f * static_cast<float>(std::sin(0.2 * depth));
                    r = g = b = road;
                    // Dashed centerline scrolls with ego z.
                    const double zw = ego_z + depth;
                    if (std::abs(rel) < 0.08 * w.road_half_width &&
                        std::fmod(zw, 2.0) < 1.0)
                        r = g = b = 0.9f;
                    // Road edges.
                    if (std::abs(std::abs(rel) - w.road_half_width) < 0.07 * w.road_half_width)
                        r = g = b = 0.75f;
                } else {
                    const double tex = 0.5 + 0.5 * std::sin(0.8 * wx) * std::sin(0.5 * (ego_z + depth));
                    r = clamp01((0.10 + 0.08 * tex) * w.scene.tint_r);
                    g = clamp01((0.35 + 0.10 * tex) * w.scene.tint_g);
                    b = clamp01((0.12 + 0.06 * tex) * w.scene.tint_b);
                }
            }
            frame.at(y, x, 0) = r;
            frame.at(y, x, 1) = g;
            frame.at(y, x, 2) = b;
        }
    }

    // Parallax skyline layers, far to near, drawn above the horizon.
    for (int li = static_cast<int>(w.layers.size()) - 1; li >= 0; --li) {
        const Layer& l = w.layers[static_cast<size_t>(li)];
        for (int x = 0; x < W; ++x) {
            const double wx = x + (ego_z * 6.0 + ego_x * 10.0 + heading * 40.0) * l.parallax;
            const double top = horizon - (l.amp * (1.0 + std::sin(l.freq * wx + l.phase)));
            for (int y = std::max(0, static_cast<int>(top)); y < static_cast<int>(horizon); ++y) {
                frame.at(y, x, 0) = clamp01(l.r * w.scene.tint_r);
                frame.at(y, x, 1) = clamp01(l.g * w.scene.tint_g);
                frame.at(y, x, 2) = clamp01(l.b * w.scene.tint_b);
            }
        }
    }

    // Obstacles: boxes on the road plane, projected with 1/depth scaling.
    for (const Obstacle& o : w.obstacles) {
        const double oz = o.z + 0.0;  // world z already advanced by the caller
        double dz = std::fmod(oz - ego_z, w.wrap_z);
        if (dz < 0) dz += w.wrap_z;
        if (dz < 1.2 || dz > 28.0) continue;
        const double dx = o.lane - heading * dz;
        const double screen_x = W / 2.0 + focal * dx / dz;
        const double screen_y = horizon + 0.8 * H / dz;
        const double scale = 0.9 * H * o.size / dz;
        const int x0 = static_cast<int>(screen_x - scale / 2.0);
        const int x1 = static_cast<int>(screen_x + scale / 2.0);
        const int y0 = static_cast<int>(screen_y - scale);
        const int y1 = static_cast<int>(screen_y);
        for (int y = std::max(0, y0); y <= std::min(H - 1, y1); ++y)
            for (int x = std::max(0, x0); x <= std::min(W - 1, x1); ++x) {
                frame.at(y, x, 0) = o.r;
                frame.at(y, x, 1) = o.g;
                frame.at(y, x, 2) = o.b;
            }
    }
}

}  // namespace

void WorldParams::validate() const {
    if (image_height <= 0 || image_width <= 0)
        throw std::invalid_argument("WorldParams: image size must be positive");
    if (num_layers < 0 || num_obstacles < 0)
        throw std::invalid_argument("WorldParams: counts must be non-negative");
    if (!(ego_speed_min <= ego_speed_max) || ego_speed_min < 0.0)
        throw std::invalid_argument("WorldParams: invalid speed range");
}

Episode gen_episode(const WorldParams& params, int length) {
    params.validate();
    if (length < 1) throw std::invalid_argument("gen_episode: length must be >= 1");

    World world = build_world(params);
    Episode ep;
    ep.frames.reserve(static_cast<size_t>(length));
    ep.poses.resize(static_cast<size_t>(length));
    ep.frame_period = 0.1;

    // Ego trajectory: smooth speed within the configured range, gentle
    // sinusoidal steering. Heading 0 at frame 0 keeps pose 0 the identity.
    std::vector<double> xs(static_cast<size_t>(length)), zs(static_cast<size_t>(length)),
        headings(static_cast<size_t>(length)), speeds(static_cast<size_t>(length));
    double x = 0.0, z = 0.0, heading = 0.0;
    double speed_sum = 0.0;
    for (int t = 0; t < length; ++t) {
        const double wave = 0.5 + 0.5 * std::sin(world.speed_phase + world.speed_freq * t * 6.28318);
        const double s = params.ego_speed_min + (params.ego_speed_max - params.ego_speed_min) * wave;
        xs[static_cast<size_t>(t)] = x;
        zs[static_cast<size_t>(t)] = z;
        headings[static_cast<size_t>(t)] = heading;
        speeds[static_cast<size_t>(t)] = s;
        speed_sum += s;
        x += s * std::sin(heading);
        z += s * std::cos(heading);
        heading = world.steer_amp * std::sin(world.steer_freq * (t + 1) * 6.28318);
    }
    world.scene.mean_speed = speed_sum / length;
    ep.descriptor = descriptor_of(params, world.scene);

    for (int t = 0; t < length; ++t) {
        Frame frame(params.image_height, params.image_width);
        World advanced = world;
        for (auto& o : advanced.obstacles) o.z += o.speed * t;
        render(params, advanced, xs[static_cast<size_t>(t)], zs[static_cast<size_t>(t)],
               headings[static_cast<size_t>(t)], frame);
        ep.frames.push_back(std::move(frame));

        if (t > 0) {
            const double h = headings[static_cast<size_t>(t)];
            // World-to-camera axes for heading h (yaw about +y).
            const std::array<double, 9> a = {std::cos(h), 0.0, -std::sin(h),
                                             0.0,        1.0, 0.0,
                                             std::sin(h), 0.0, std::cos(h)};
            trajwarp::CameraPose& pose = ep.poses[static_cast<size_t>(t)];
            pose.R = a;  // frame-0 axes are the identity
            const double dx0 = -xs[static_cast<size_t>(t)];
            const double dz0 = -zs[static_cast<size_t>(t)];
            pose.T = {a[0] * dx0 + a[2] * dz0, 0.0, a[6] * dx0 + a[8] * dz0};
        }
    }
    return ep;
}

Tensor descriptor_of(const WorldParams& params, const SceneState& state) {
    params.validate();
    Tensor d({kDescriptorDim});
    d[0] = state.tint_r;
    d[1] = state.tint_g;
    d[2] = state.tint_b;
    d[3] = state.obstacle_count / 16.0;
    d[4] = state.num_layers / 8.0;
    // Speed bucket one-hot over [0, 2) world units per frame.
    const int bucket = std::min(3, std::max(0, static_cast<int>(state.mean_speed / 0.5)));
    d[5 + bucket] = 1.0;
    d[9] = state.mean_speed;
    // Spread features so nearby scenes stay distinguishable for the model.
    for (int i = 10; i < kDescriptorDim; ++i)
        d[i] = std::sin((i - 9) * (0.7 * state.obstacle_count + 1.3 * state.mean_speed +
                                   2.1 * state.tint_r + 0.9 * state.num_layers));
    return d;
}

std::pair<std::vector<Episode>, std::vector<Episode>> split_dataset(std::vector<Episode> episodes,
                                                                    double ratio, std::uint64_t seed) {
    if (episodes.empty()) throw std::invalid_argument("split_dataset: empty input");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split_dataset: ratio must be in (0, 1)");
    const size_t n = episodes.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, {0x5717}));
    for (size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);

    const size_t train_n = static_cast<size_t>(std::llround(ratio * static_cast<double>(n)));
    std::pair<std::vector<Episode>, std::vector<Episode>> out;
    for (size_t i = 0; i < n; ++i) {
        Episode& ep = episodes[order[i]];
        if (i < train_n)
            out.first.push_back(std::move(ep));
        else
            out.second.push_back(std::move(ep));
    }
    return out;
}

}  // namespace hierwm::toyworld
