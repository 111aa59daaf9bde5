#include "hierwm/codec.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace hierwm::codec {

Tensor LatentClip::stacked() const {
    validate();
    const Tensor& first = latents.front();
    std::vector<int> shape = {length()};
    shape.insert(shape.end(), first.shape.begin(), first.shape.end());
    Tensor out(shape);
    const std::int64_t stride = first.size();
    for (int i = 0; i < length(); ++i)
        std::memcpy(out.ptr() + i * stride, latents[static_cast<size_t>(i)].ptr(),
                    static_cast<size_t>(stride) * sizeof(double));
    return out;
}

LatentClip LatentClip::from_stacked(const Tensor& stacked, std::vector<int> frame_indices) {
    if (stacked.ndim() < 2) throw std::invalid_argument("LatentClip: stacked tensor must have a clip axis");
    const int k = stacked.dim(0);
    if (static_cast<int>(frame_indices.size()) != k)
        throw std::invalid_argument("LatentClip: index count does not match clip length");
    std::vector<int> lat_shape(stacked.shape.begin() + 1, stacked.shape.end());
    const std::int64_t stride = Tensor::count(lat_shape);
    LatentClip clip;
    clip.frame_indices = std::move(frame_indices);
    clip.latents.reserve(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        Tensor lat(lat_shape);
        std::memcpy(lat.ptr(), stacked.ptr() + i * stride, static_cast<size_t>(stride) * sizeof(double));
        clip.latents.push_back(std::move(lat));
    }
    clip.validate();
    return clip;
}

void LatentClip::validate() const {
    if (latents.empty()) throw std::invalid_argument("LatentClip: empty");
    if (latents.size() != frame_indices.size())
        throw std::invalid_argument("LatentClip: latent/index count mismatch");
    for (size_t i = 1; i < latents.size(); ++i) {
        if (!latents[i].same_shape(latents[0]))
            throw std::invalid_argument("LatentClip: latent shapes differ");
        if (frame_indices[i] <= frame_indices[i - 1])
            throw std::invalid_argument("LatentClip: frame indices must be strictly increasing");
    }
}

Tensor encode_frame(const Frame& frame, int patch) {
    if (patch <= 0) throw std::invalid_argument("encode_frame: patch must be positive");
    if (frame.h % patch != 0 || frame.w % patch != 0)
        throw std::invalid_argument("encode_frame: frame size not divisible by patch");
    const int lh = frame.h / patch;
    const int lw = frame.w / patch;
    const int lc = 3 * patch * patch;
    Tensor lat({lh, lw, lc});
    for (int y = 0; y < lh; ++y)
        for (int x = 0; x < lw; ++x) {
            double* cell = lat.ptr() + (static_cast<std::int64_t>(y) * lw + x) * lc;
            for (int ch = 0; ch < 3; ++ch)
                for (int dy = 0; dy < patch; ++dy)
                    for (int dx = 0; dx < patch; ++dx)
                        cell[ch * patch * patch + dy * patch + dx] =
                            frame.at(y * patch + dy, x * patch + dx, ch);
        }
    return lat;
}

Frame decode_latent(const Tensor& latent, int patch) {
    if (latent.ndim() != 3) throw std::invalid_argument("decode_latent: latent must be [h, w, c]");
    const int lh = latent.dim(0);
    const int lw = latent.dim(1);
    const int lc = latent.dim(2);
    if (lc != 3 * patch * patch)
        throw std::invalid_argument("decode_latent: channel count inconsistent with patch");
    Frame frame(lh * patch, lw * patch);
    for (int y = 0; y < lh; ++y)
        for (int x = 0; x < lw; ++x) {
            const double* cell = latent.ptr() + (static_cast<std::int64_t>(y) * lw + x) * lc;
            for (int ch = 0; ch < 3; ++ch)
                for (int dy = 0; dy < patch; ++dy)
                    for (int dx = 0; dx < patch; ++dx)
                        frame.at(y * patch + dy, x * patch + dx, ch) =
                            static_cast<float>(cell[ch * patch * patch + dy * patch + dx]);
        }
    return frame;
}

LatentClip encode_clip(const std::vector<Frame>& frames, const std::vector<int>& indices, int patch) {
    if (indices.empty()) throw std::invalid_argument("encode_clip: empty index list");
    LatentClip clip;
    clip.frame_indices = indices;
    clip.latents.reserve(indices.size());
    for (int idx : indices) {
        if (idx < 0 || idx >= static_cast<int>(frames.size()))
            throw std::out_of_range("encode_clip: frame index out of range");
        clip.latents.push_back(encode_frame(frames[static_cast<size_t>(idx)], patch));
    }
    clip.validate();
    return clip;
}

void save_latent(const std::string& path, const Tensor& latent, int patch) {
    nlohmann::json header;
    header["dtype"] = "f32";
    header["shape"] = latent.shape;
    header["patch"] = patch;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_latent: cannot open " + path);
    out << header.dump() << '\n';
    std::vector<float> buf(latent.data.begin(), latent.data.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw std::runtime_error("save_latent: write failed for " + path);
}

Tensor load_latent(const std::string& path, int* patch_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_latent: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_latent: missing header in " + path);
    nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("dtype", "") != "f32")
        throw std::runtime_error("load_latent: unsupported dtype in " + path);
    std::vector<int> shape = header.at("shape").get<std::vector<int>>();
    if (patch_out) *patch_out = header.at("patch").get<int>();
    Tensor lat(shape);
    std::vector<float> buf(static_cast<size_t>(lat.size()));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
        throw std::runtime_error("load_latent: truncated blob in " + path);
    for (size_t i = 0; i < buf.size(); ++i) lat[static_cast<std::int64_t>(i)] = buf[i];
    return lat;
}

}  // namespace hierwm::codec
