#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hierwm {

// One RGB frame, values in [0, 1], row-major HWC. Frames are bulk data so
// they stay float; all model math happens on double latents.
struct Frame {
    int h = 0;
    int w = 0;
    std::vector<float> rgb;

    Frame() = default;
    Frame(int height, int width) : h(height), w(width), rgb(static_cast<size_t>(height) * width * 3, 0.0f) {
        if (height <= 0 || width <= 0) throw std::invalid_argument("Frame: non-positive size");
    }

    float& at(int y, int x, int c) { return rgb[(static_cast<size_t>(y) * w + x) * 3 + c]; }
    float at(int y, int x, int c) const { return rgb[(static_cast<size_t>(y) * w + x) * 3 + c]; }

    std::int64_t size() const { return static_cast<std::int64_t>(rgb.size()); }
};

inline bool bitwise_equal(const Frame& a, const Frame& b) {
    return a.h == b.h && a.w == b.w && a.rgb == b.rgb;
}

}  // namespace hierwm
