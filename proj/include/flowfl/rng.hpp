#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace flowfl {

using Rng = std::mt19937_64;

// FNV-1a over raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent generator from the run seed and a stable label,
// optionally qualified by integers (robot id, round, ...). Changing one
// consumer's label never shifts another consumer's stream.
inline Rng make_stream(std::uint64_t seed, std::string_view label,
                       std::initializer_list<std::uint64_t> qualifiers = {}) {
    std::uint64_t h = splitmix64(seed ^ fnv1a64(label));
    for (std::uint64_t q : qualifiers) h = splitmix64(h ^ splitmix64(q + 0x632be59bd9b4e019ULL));
    return Rng(h);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace flowfl
