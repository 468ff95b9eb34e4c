#pragma once

#include <cstdint>
#include <random>

namespace rgnn {

// splitmix64 finalizer; used to derive independent seed streams so that the
// stages of a run (init, split, negatives, attacks) cannot collide.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return mix_seed(base ^ mix_seed(stream));
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t stream) {
    return std::mt19937_64(derive_seed(base, stream));
}

// Stable stream ids for the pipeline stages.
namespace seed_stream {
constexpr std::uint64_t split = 1;
constexpr std::uint64_t init = 2;
constexpr std::uint64_t surrogate = 3;
constexpr std::uint64_t negatives = 4;
constexpr std::uint64_t attack = 5;
constexpr std::uint64_t targets = 6;
constexpr std::uint64_t ncl = 7;
constexpr std::uint64_t sbm = 8;
}  // namespace seed_stream

}  // namespace rgnn
