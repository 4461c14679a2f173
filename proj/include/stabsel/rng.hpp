#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stabsel::rng {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a, used to turn stream labels into tags at compile time.
constexpr std::uint64_t tag(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for sub-stream `index` of the stream `stream_tag` under `master`.
/// Streams are a pure function of their coordinates, so work can be
/// scheduled in any order without changing results.
constexpr std::uint64_t derive(std::uint64_t master, std::uint64_t stream_tag,
                               std::uint64_t index = 0) noexcept {
    return mix(mix(master ^ mix(stream_tag)) + index);
}

using Engine = std::mt19937_64;

inline Engine engine(std::uint64_t master, std::uint64_t stream_tag, std::uint64_t index = 0) {
    return Engine(derive(master, stream_tag, index));
}

namespace streams {
inline constexpr std::uint64_t simulate = tag("simulate");
inline constexpr std::uint64_t subsample = tag("subsample");
inline constexpr std::uint64_t cv_folds = tag("cv-folds");
inline constexpr std::uint64_t bootstrap = tag("bootstrap");
inline constexpr std::uint64_t holdout = tag("holdout");
inline constexpr std::uint64_t test_set = tag("test-set");
} // namespace streams

} // namespace stabsel::rng
