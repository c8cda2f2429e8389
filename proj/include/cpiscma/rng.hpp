// Seed derivation for reproducible Monte Carlo runs.
//
// Every frame gets its own engine seeded from (master, stream, counter), so
// the random sequence of a frame depends only on its index, not on which
// worker thread processed it or in what order.
#pragma once

#include <cstdint>
#include <random>

namespace cpiscma {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// stream: e.g. the SNR-point index; counter: the frame index within the stream.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                           std::uint64_t counter) {
    return splitmix64(splitmix64(master ^ splitmix64(stream + 1)) ^ counter);
}

inline Engine make_frame_engine(std::uint64_t master, std::uint64_t stream,
                                std::uint64_t counter) {
    return Engine(derive_seed(master, stream, counter));
}

}  // namespace cpiscma
