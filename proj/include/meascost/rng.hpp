#pragma once

// Deterministic per-stream random engines. Every Monte-Carlo shot derives its
// own engine from (seed, stream ids), so results do not depend on the order
// or the thread in which shots run.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace meascost {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t key = splitmix64(seed);
    for (const auto id : ids) key = splitmix64(key ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    return key;
}

using Engine = std::mt19937_64;

inline Engine stream_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    return Engine(stream_key(seed, ids));
}

// Stream tags keep independent uses of one seed apart.
enum class Stream : std::uint64_t {
    quadrature = 1,
    coherent_g = 2,
    coherent_e = 3,
    thermal_g = 4,
    thermal_e = 5,
    thermal_background = 6,
    fit_noise = 7,
};

inline Engine stream_engine(std::uint64_t seed, Stream tag, std::uint64_t index) {
    return stream_engine(seed, {static_cast<std::uint64_t>(tag), index});
}

}  // namespace meascost
