#pragma once

#include <string>
#include <vector>

#include "hierwm/tensor.hpp"
#include "hierwm/types.hpp"

namespace hierwm::codec {

// Lossless per-frame latent codec: space-to-depth patchify. A frame of
// H x W x 3 becomes a latent of (H/patch) x (W/patch) x (3*patch^2); decode
// is the exact inverse, so encode/decode round-trips are bitwise and the
// reconstruction error of the pipeline is identically zero.

struct LatentClip {
    std::vector<Tensor> latents;     // each [h, w, c], all the same shape
    std::vector<int> frame_indices;  // source frame index per latent, strictly increasing

    int length() const { return static_cast<int>(latents.size()); }

    // Stacks into one [K, h, w, c] tensor (denoiser-facing layout).
    Tensor stacked() const;
    static LatentClip from_stacked(const Tensor& stacked, std::vector<int> frame_indices);

    void validate() const;  // throws when shapes differ or indices not increasing
};

Tensor encode_frame(const Frame& frame, int patch);
Frame decode_latent(const Tensor& latent, int patch);

LatentClip encode_clip(const std::vector<Frame>& frames, const std::vector<int>& indices, int patch);

// Raw little-endian float32 blob with a one-line JSON header (shape, patch, dtype).
void save_latent(const std::string& path, const Tensor& latent, int patch);
Tensor load_latent(const std::string& path, int* patch_out = nullptr);

}  // namespace hierwm::codec
