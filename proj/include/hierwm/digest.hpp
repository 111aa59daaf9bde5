#pragma once

#include <cstdint>
#include <cstring>
#include <string>

#include "hierwm/tensor.hpp"

namespace hierwm {

// FNV-1a over raw bytes. Used for parameter/noise digests in the distillation
// audit and for config compatibility checks. Not cryptographic.
inline std::uint64_t fnv1a(const void* bytes, size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const unsigned char* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

inline std::uint64_t digest(const Tensor& t) {
    std::uint64_t h = fnv1a(t.shape.data(), t.shape.size() * sizeof(int));
    return fnv1a(t.data.data(), t.data.size() * sizeof(double), h);
}

inline std::uint64_t digest(const TensorMap& m) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& e : m.entries()) {
        h = fnv1a(e.name.data(), e.name.size(), h);
        h = fnv1a(e.tensor.data.data(), e.tensor.data.size() * sizeof(double), h);
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

}  // namespace hierwm
