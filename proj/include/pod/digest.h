#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pod {

// FNV-1a 64-bit. Stable across platforms; used for goal-set hashes, config
// digests, and output manifests.
inline uint64_t fnv1a64(std::string_view s, uint64_t h = 14695981039346656037ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

}  // namespace pod
