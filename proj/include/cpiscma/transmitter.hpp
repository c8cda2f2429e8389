// Bit-to-block mapping: the first m1 bits pick the active slots from the LUT,
// the remaining m2 = t*log2(M) bits pick one codebook symbol per active slot
// (ascending slot order), and a scale factor applies the power normalization.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cpiscma/codebook.hpp"
#include "cpiscma/index_map.hpp"
#include "cpiscma/types.hpp"

namespace cpiscma {

inline constexpr int kInactiveSlot = -1;

struct UserBlock {
    int user = 0;
    double scale = 1.0;
    // one entry per slot: kInactiveSlot, or a 0-based codebook symbol index
    std::vector<int> slot_symbols;

    std::vector<int> active_set() const {
        std::vector<int> s;
        for (int i = 0; i < static_cast<int>(slot_symbols.size()); ++i)
            if (slot_symbols[i] != kInactiveSlot) s.push_back(i);
        return s;
    }
    // chip value at flat position slot*K + k
    cplx chip(const Codebook& cb, int flat, int K) const {
        const int slot = flat / K;
        const int m = slot_symbols[slot];
        if (m == kInactiveSlot) return {0.0, 0.0};
        return scale * cb.entries[user][m][flat % K];
    }
};

enum class NormalizationMode { None, BlockEnergy };

// BlockEnergy scales active codewords by sqrt(n/t) so the n-slot block
// carries total energy n, matching a fully occupied block of unit-energy
// codewords.
inline double normalize_policy(NormalizationMode mode, int n, int t) {
    switch (mode) {
        case NormalizationMode::None:
            return 1.0;
        case NormalizationMode::BlockEnergy:
            return std::sqrt(static_cast<double>(n) / static_cast<double>(t));
    }
    return 1.0;
}

enum class SymbolLabeling { NaturalBinary, Gray };

inline int bits_per_symbol(const Codebook& cb) {
    const auto m = static_cast<std::uint32_t>(cb.num_symbols);
    if (!std::has_single_bit(m))
        throw DomainError("codebook size M must be a power of two for bit mapping");
    return std::bit_width(m) - 1;
}

namespace detail {

inline int symbol_from_group(std::uint32_t v, SymbolLabeling lab) {
    return lab == SymbolLabeling::Gray ? static_cast<int>(v ^ (v >> 1)) : static_cast<int>(v);
}

inline std::uint32_t group_from_symbol(std::uint32_t m, SymbolLabeling lab) {
    if (lab == SymbolLabeling::NaturalBinary) return m;
    std::uint32_t v = 0;
    for (; m; m >>= 1) v ^= m;  // inverse Gray: prefix xor
    return v;
}

}  // namespace detail

inline UserBlock encode_block(const Bits& bits, const IndexLut& lut, const Codebook& cb, int user,
                              double scale = 1.0,
                              SymbolLabeling labeling = SymbolLabeling::NaturalBinary) {
    const int bps = bits_per_symbol(cb);
    const int need = lut.m1 + lut.t * bps;
    if (static_cast<int>(bits.size()) != need)
        throw DomainError("encode_block: expected " + std::to_string(need) + " bits, got " +
                          std::to_string(bits.size()));

    UserBlock block;
    block.user = user;
    block.scale = scale;
    block.slot_symbols.assign(lut.n, kInactiveSlot);

    const Bits index_bits(bits.begin(), bits.begin() + lut.m1);
    const auto& slots = bits_to_indices(lut, index_bits);  // sorted ascending
    for (int beta = 0; beta < lut.t; ++beta) {
        std::uint32_t v = 0;
        for (int b = 0; b < bps; ++b) v = (v << 1) | bits[lut.m1 + beta * bps + b];
        block.slot_symbols[slots[beta]] = detail::symbol_from_group(v, labeling);
    }
    return block;
}

inline Bits decode_block_to_bits(const UserBlock& block, const IndexLut& lut, const Codebook& cb,
                                 SymbolLabeling labeling = SymbolLabeling::NaturalBinary) {
    const int bps = bits_per_symbol(cb);
    const auto active = block.active_set();
    const auto index_bits = indices_to_bits(lut, active);
    if (!index_bits)
        throw DomainError("decode_block_to_bits: active-slot pattern is not a LUT row");
    Bits bits = *index_bits;
    bits.reserve(lut.m1 + lut.t * bps);
    for (int slot : active) {
        const auto v =
            detail::group_from_symbol(static_cast<std::uint32_t>(block.slot_symbols[slot]), labeling);
        for (int b = bps - 1; b >= 0; --b) bits.push_back((v >> b) & 1u);
    }
    return bits;
}

inline double block_energy(const UserBlock& block, const Codebook& cb) {
    double e = 0.0;
    for (int m : block.slot_symbols)
        if (m != kInactiveSlot) e += block.scale * block.scale * detail::sq_norm(cb.entries[block.user][m]);
    return e;
}

}  // namespace cpiscma
