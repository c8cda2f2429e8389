// Message-passing-aided detection: classify each user's slot-decision pattern
// against the LUT, repair unreliable users through candidate sets, cancel
// reliable codewords from the received chips, and finish with a partial ML
// search over the candidate Cartesian product.
//
// Pattern label: gamma = n - |D| where D is the set of slots decided nonzero.
// A pattern is reliable exactly when D is a LUT row. Candidate sets follow a
// single minimal-repair rule: take the LUT rows at minimal symmetric
// difference from D, keep the detected symbol on slots shared with D, and
// range over all M symbols on newly activated slots. For the (4,2) table this
// yields candidate counts 4 / 2 / 4M / 2M / 2^m1 * M^2 for gamma = 0..4.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "cpiscma/channel.hpp"
#include "cpiscma/index_map.hpp"
#include "cpiscma/mpa.hpp"
#include "cpiscma/transmitter.hpp"
#include "cpiscma/types.hpp"

namespace cpiscma {

// Printed closed form: n patterns plus one more when C(n,t) - n > 0.
inline int count_error_patterns(int n, int t) {
    if (t < 1 || t > n) throw DomainError("count_error_patterns: need 1 <= t <= n");
    return n + (binomial(n, t) > static_cast<std::uint64_t>(n) ? 1 : 0);
}

// Structural count: cases actually reachable given the LUT, i.e. every
// |D| != t plus the illegal same-weight case when excluded index sets exist.
inline int structural_error_pattern_count(int n, int t) {
    const int m1 = index_bit_count(n, t);
    const bool excluded = binomial(n, t) > (std::uint64_t{1} << m1);
    return n + (excluded ? 1 : 0);
}

struct DetectedPattern {
    std::vector<int> decisions;   // per slot: -1 or 0-based symbol
    std::vector<int> active_set;  // D, sorted slots decided nonzero
    int gamma = 0;                // n - |D|
    bool reliable = false;        // D is a LUT row
};

inline DetectedPattern classify_pattern(const std::vector<int>& decisions, const IndexLut& lut) {
    if (static_cast<int>(decisions.size()) != lut.n)
        throw DomainError("classify_pattern: expected " + std::to_string(lut.n) + " slot decisions");
    DetectedPattern p;
    p.decisions = decisions;
    for (int s = 0; s < lut.n; ++s)
        if (decisions[s] != kInactiveSlot) p.active_set.push_back(s);
    p.gamma = lut.n - static_cast<int>(p.active_set.size());
    p.reliable = static_cast<int>(p.active_set.size()) == lut.t &&
                 lut.row_of(p.active_set).has_value();
    return p;
}

struct CandidateSet {
    int user = 0;
    int gamma = 0;
    std::vector<UserBlock> candidates;
};

inline CandidateSet build_candidates(const DetectedPattern& pattern, const IndexLut& lut,
                                     const Codebook& cb, int user, double scale) {
    if (pattern.reliable)
        throw DomainError("build_candidates: pattern is reliable, nothing to repair");
    CandidateSet set;
    set.user = user;
    set.gamma = pattern.gamma;

    // LUT rows at minimal symmetric difference |I ^ D|
    int best = std::numeric_limits<int>::max();
    std::vector<const LutRow*> minimal;
    for (const auto& row : lut.rows) {
        std::vector<int> sym;
        std::set_symmetric_difference(row.slots.begin(), row.slots.end(),
                                      pattern.active_set.begin(), pattern.active_set.end(),
                                      std::back_inserter(sym));
        const int d = static_cast<int>(sym.size());
        if (d < best) {
            best = d;
            minimal.clear();
        }
        if (d == best) minimal.push_back(&row);
    }

    for (const LutRow* row : minimal) {
        std::vector<int> free_slots;  // newly activated, symbol unknown
        UserBlock base;
        base.user = user;
        base.scale = scale;
        base.slot_symbols.assign(lut.n, kInactiveSlot);
        for (int s : row->slots) {
            if (pattern.decisions[s] != kInactiveSlot)
                base.slot_symbols[s] = pattern.decisions[s];  // retained detection
            else
                free_slots.push_back(s);
        }
        // odometer over M symbols on each free slot, last slot fastest
        std::vector<int> c(free_slots.size(), 0);
        while (true) {
            UserBlock cand = base;
            for (std::size_t i = 0; i < free_slots.size(); ++i) cand.slot_symbols[free_slots[i]] = c[i];
            set.candidates.push_back(std::move(cand));
            int i = static_cast<int>(free_slots.size()) - 1;
            for (; i >= 0; --i) {
                if (++c[i] < cb.num_symbols) break;
                c[i] = 0;
            }
            if (i < 0) break;
        }
    }
    return set;
}

// r_s = y_s - sum_{j in u} h_{j,s} c_{j,s} over every chip of the frame.
inline cvec cancel_reliable(const ReceivedFrame& frame, const Codebook& cb,
                            const std::vector<UserBlock>& reliable_blocks) {
    cvec r = frame.chips;
    for (const auto& block : reliable_blocks)
        for (int s = 0; s < frame.n * frame.K; ++s)
            r[s] -= frame.channel.gains[block.user][s] * block.chip(cb, s, frame.K);
    return r;
}

struct PmlResult {
    std::vector<UserBlock> blocks;  // one per erroneous user, candidate-set order
    double search_space = 1.0;      // |Psi| = product of candidate-set sizes
    bool fallback = false;          // coordinate descent used instead of joint search
};

namespace detail {

inline std::vector<cvec> faded_candidates(const ReceivedFrame& frame, const Codebook& cb,
                                          const CandidateSet& set) {
    std::vector<cvec> out;
    out.reserve(set.candidates.size());
    for (const auto& cand : set.candidates) {
        cvec f(frame.n * frame.K, cplx{0.0, 0.0});
        for (int slot = 0; slot < frame.n; ++slot) {
            if (cand.slot_symbols[slot] == kInactiveSlot) continue;
            for (int k = 0; k < frame.K; ++k) {
                const int s = slot * frame.K + k;
                f[s] = frame.channel.gains[set.user][s] * cand.chip(cb, s, frame.K);
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

inline double distance_sq(const cvec& r, const cvec& sum) {
    double d = 0.0;
    for (std::size_t s = 0; s < r.size(); ++s) d += std::norm(r[s] - sum[s]);
    return d;
}

}  // namespace detail

// Joint minimum-distance search over the Cartesian product of the candidate
// sets when |Psi| fits under the cap; otherwise coordinate descent over users
// ordered by ascending candidate count (swept until stable or 10 sweeps).
inline PmlResult pml_detect(const cvec& residual, const ReceivedFrame& frame, const Codebook& cb,
                            const std::vector<CandidateSet>& sets, std::uint64_t cap) {
    PmlResult result;
    if (sets.empty()) return result;
    for (const auto& s : sets)
        if (s.candidates.empty())
            throw ValidationError("pml_detect: empty candidate set for user " +
                                  std::to_string(s.user + 1));

    const std::size_t n_users = sets.size();
    std::vector<std::vector<cvec>> faded(n_users);
    for (std::size_t i = 0; i < n_users; ++i) {
        faded[i] = detail::faded_candidates(frame, cb, sets[i]);
        result.search_space *= static_cast<double>(sets[i].candidates.size());
    }

    std::vector<std::size_t> choice(n_users, 0);
    if (result.search_space <= static_cast<double>(cap)) {
        // DFS with per-level partial sums; hypothesis order matches a nested
        // loop with user 0 outermost, ties keep the first minimum
        std::vector<cvec> partial(n_users + 1, cvec(frame.n * frame.K, cplx{0.0, 0.0}));
        std::vector<std::size_t> c(n_users, 0);
        double best = std::numeric_limits<double>::infinity();
        std::size_t level = 0;
        while (true) {
            if (level == n_users) {
                const double d = detail::distance_sq(residual, partial[n_users]);
                if (d < best) {
                    best = d;
                    choice = c;
                }
                // backtrack to the deepest level that can still advance, then
                // resume there so its partial sum is rebuilt
                while (level > 0 && c[level - 1] + 1 == faded[level - 1].size()) {
                    --level;
                    c[level] = 0;
                }
                if (level == 0) break;
                ++c[level - 1];
                --level;
                continue;
            }
            const auto& f = faded[level][c[level]];
            auto& next = partial[level + 1];
            const auto& prev = partial[level];
            for (std::size_t s = 0; s < next.size(); ++s) next[s] = prev[s] + f[s];
            ++level;
        }
    } else {
        result.fallback = true;
        std::vector<std::size_t> order(n_users);
        for (std::size_t i = 0; i < n_users; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return sets[a].candidates.size() < sets[b].candidates.size();
        });
        for (int sweep = 0; sweep < 10; ++sweep) {
            bool changed = false;
            for (std::size_t i : order) {
                cvec rest(residual.size(), cplx{0.0, 0.0});
                for (std::size_t l = 0; l < n_users; ++l)
                    if (l != i)
                        for (std::size_t s = 0; s < rest.size(); ++s)
                            rest[s] += faded[l][choice[l]][s];
                for (std::size_t s = 0; s < rest.size(); ++s) rest[s] = residual[s] - rest[s];
                double best = std::numeric_limits<double>::infinity();
                std::size_t pick = choice[i];
                for (std::size_t cidx = 0; cidx < faded[i].size(); ++cidx) {
                    double d = 0.0;
                    for (std::size_t s = 0; s < rest.size(); ++s)
                        d += std::norm(rest[s] - faded[i][cidx][s]);
                    if (d < best) {
                        best = d;
                        pick = cidx;
                    }
                }
                if (pick != choice[i]) {
                    choice[i] = pick;
                    changed = true;
                }
            }
            if (!changed) break;
        }
    }

    for (std::size_t i = 0; i < n_users; ++i) result.blocks.push_back(sets[i].candidates[choice[i]]);
    return result;
}

struct UserDiag {
    bool reliable = false;
    int gamma = 0;
    std::uint64_t candidate_count = 0;  // |psi|, zero for reliable users
};

struct FrameDiagnostics {
    std::vector<UserDiag> users;
    double pml_search_space = 0.0;  // |Psi| when PML ran, else 0
    bool pml_fallback = false;
};

struct DetectParams {
    MpaParams mpa;
    double scale = 1.0;
    std::uint64_t pml_cap = 100000;
    SymbolLabeling labeling = SymbolLabeling::NaturalBinary;
};

struct FrameDecision {
    std::vector<Bits> bits;  // per user, m1+m2 bits
    FrameDiagnostics diag;
};

// Full MPAD pipeline over one received frame: modified MPA per slot, pattern
// classification, codeword cancellation, partial ML, final bit decisions.
inline FrameDecision detect_frame(const ReceivedFrame& frame, const Codebook& cb,
                                  const FactorGraph& fg, const IndexLut& lut,
                                  const DetectParams& params) {
    const int J = cb.num_users;
    const double n0 = std::max(frame.noise_var, params.mpa.n0_floor);

    // per-slot modified MPA
    std::vector<std::vector<int>> decisions(J, std::vector<int>(frame.n));
    std::vector<cvec> h_slot(J, cvec(frame.K));
    for (int slot = 0; slot < frame.n; ++slot) {
        cvec y_slot(frame.chips.begin() + slot * frame.K,
                    frame.chips.begin() + (slot + 1) * frame.K);
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < frame.K; ++k) h_slot[j][k] = frame.channel.gains[j][slot * frame.K + k];
        const SlotDecision sd =
            run_mpa_slot(y_slot, h_slot, cb, fg, n0, params.scale, params.mpa);
        for (int j = 0; j < J; ++j) decisions[j][slot] = sd.entries[j];
    }

    FrameDecision out;
    out.bits.resize(J);
    out.diag.users.resize(J);
    std::vector<UserBlock> reliable_blocks;
    std::vector<CandidateSet> candidate_sets;
    std::vector<int> erroneous_users;
    for (int j = 0; j < J; ++j) {
        const DetectedPattern pattern = classify_pattern(decisions[j], lut);
        out.diag.users[j].reliable = pattern.reliable;
        out.diag.users[j].gamma = pattern.gamma;
        if (pattern.reliable) {
            UserBlock block;
            block.user = j;
            block.scale = params.scale;
            block.slot_symbols = pattern.decisions;
            reliable_blocks.push_back(std::move(block));
        } else {
            CandidateSet set = build_candidates(pattern, lut, cb, j, params.scale);
            out.diag.users[j].candidate_count = set.candidates.size();
            candidate_sets.push_back(std::move(set));
            erroneous_users.push_back(j);
        }
    }

    for (const auto& block : reliable_blocks)
        out.bits[block.user] = decode_block_to_bits(block, lut, cb, params.labeling);

    if (!candidate_sets.empty()) {
        const cvec residual = cancel_reliable(frame, cb, reliable_blocks);
        const PmlResult pml = pml_detect(residual, frame, cb, candidate_sets, params.pml_cap);
        out.diag.pml_search_space = pml.search_space;
        out.diag.pml_fallback = pml.fallback;
        for (std::size_t i = 0; i < erroneous_users.size(); ++i)
            out.bits[erroneous_users[i]] = decode_block_to_bits(pml.blocks[i], lut, cb, params.labeling);
    }
    return out;
}

}  // namespace cpiscma
