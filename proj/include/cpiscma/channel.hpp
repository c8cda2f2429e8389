// Multi-user uplink: per-chip Rayleigh gains, Eb/N0 conversion, and the
// superposition y_s = sum_j h_{j,s} c_{j,s} + z_s over the n*K frame chips.
#pragma once

#include <cmath>
#include <vector>

#include "cpiscma/codebook.hpp"
#include "cpiscma/rng.hpp"
#include "cpiscma/transmitter.hpp"
#include "cpiscma/types.hpp"

namespace cpiscma {

enum class FadingMode {
    PerChip,   // i.i.d. CN(0,1) per user per chip (fast fading)
    PerSlot,   // constant over each K-chip slot, i.i.d. across slots
    Identity,  // all gains 1 (test hook)
};

struct ChannelState {
    int num_users = 0;
    int num_chips = 0;              // n*K
    std::vector<cvec> gains;        // gains[j][s]
};

struct ReceivedFrame {
    cvec chips;                     // length n*K
    double noise_var = 0.0;         // N0 per complex chip
    ChannelState channel;
    int n = 0;
    int K = 0;
};

inline ChannelState draw_channel(Engine& rng, int num_users, int n, int K,
                                 FadingMode mode = FadingMode::PerChip) {
    if (num_users < 1 || n < 1 || K < 1)
        throw DomainError("draw_channel: dimensions must be positive");
    ChannelState ch;
    ch.num_users = num_users;
    ch.num_chips = n * K;
    ch.gains.assign(num_users, cvec(ch.num_chips));
    if (mode == FadingMode::Identity) {
        for (auto& g : ch.gains) std::fill(g.begin(), g.end(), cplx{1.0, 0.0});
        return ch;
    }
    std::normal_distribution<double> comp(0.0, std::sqrt(0.5));
    for (int j = 0; j < num_users; ++j) {
        if (mode == FadingMode::PerChip) {
            for (int s = 0; s < ch.num_chips; ++s) ch.gains[j][s] = {comp(rng), comp(rng)};
        } else {
            for (int slot = 0; slot < n; ++slot) {
                const cplx g{comp(rng), comp(rng)};
                for (int k = 0; k < K; ++k) ch.gains[j][slot * K + k] = g;
            }
        }
    }
    return ch;
}

// Eb = block_energy / bits_per_user; N0 = Eb / 10^(ebn0_db/10).
inline double noise_variance(double ebn0_db, int bits_per_user, double block_energy) {
    if (bits_per_user < 1) throw DomainError("noise_variance: bits_per_user must be >= 1");
    if (!(block_energy > 0.0)) throw DomainError("noise_variance: block energy must be > 0");
    const double eb = block_energy / bits_per_user;
    return eb / std::pow(10.0, ebn0_db / 10.0);
}

// With noise_var = 0 the result is the exact noiseless superposition and the
// random source is not consumed.
inline ReceivedFrame superimpose(const std::vector<UserBlock>& blocks, const Codebook& cb,
                                 const ChannelState& ch, double noise_var, Engine& rng) {
    if (blocks.empty()) throw DomainError("superimpose: no blocks");
    const int n = static_cast<int>(blocks.front().slot_symbols.size());
    const int K = cb.num_resources;
    if (static_cast<int>(blocks.size()) != ch.num_users || ch.num_chips != n * K)
        throw DomainError("superimpose: channel shape does not match blocks");
    for (const auto& b : blocks)
        if (static_cast<int>(b.slot_symbols.size()) != n)
            throw DomainError("superimpose: blocks disagree on slot count");

    ReceivedFrame frame;
    frame.n = n;
    frame.K = K;
    frame.noise_var = noise_var;
    frame.channel = ch;
    frame.chips.assign(n * K, cplx{0.0, 0.0});
    for (int s = 0; s < n * K; ++s) {
        cplx acc{0.0, 0.0};
        for (int j = 0; j < ch.num_users; ++j) acc += ch.gains[j][s] * blocks[j].chip(cb, s, K);
        frame.chips[s] = acc;
    }
    if (noise_var > 0.0) {
        std::normal_distribution<double> comp(0.0, std::sqrt(noise_var / 2.0));
        for (auto& y : frame.chips) y += cplx{comp(rng), comp(rng)};
    }
    return frame;
}

}  // namespace cpiscma
