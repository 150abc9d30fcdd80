#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

namespace remod {

/// FNV-1a 64-bit. Used for mock-script prompt matching and response-cache keys.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t v);

/// splitmix64; the generator behind all seeded mock vectors.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Uniform double in [-1, 1), platform-independent.
inline double unit_double(std::uint64_t bits) {
    return double(bits >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

/// Shortest round-trip decimal text for a double (locale-independent).
std::string format_double(double v);

std::vector<std::string> split(const std::string& s, char sep);

}  // namespace remod
