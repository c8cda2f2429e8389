// Closed-form and empirical analysis: transmission efficiency, the
// two-exponential Q-function approximation, pairwise error probability
// averaged over Rayleigh fading, the union bound on average block error
// rate, and error-pattern occurrence statistics.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cpiscma/channel.hpp"
#include "cpiscma/index_map.hpp"
#include "cpiscma/mpad.hpp"
#include "cpiscma/rng.hpp"
#include "cpiscma/transmitter.hpp"
#include "cpiscma/types.hpp"

namespace cpiscma {

struct Rational {
    long long num = 0;
    long long den = 1;

    static Rational of(long long n, long long d) {
        const long long g = std::gcd(n, d);
        return {n / g, d / g};
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

struct EfficiencyReport {
    Rational r_t_c;     // C-SCMA bits/chip
    Rational r_t_cpi;   // CPI-SCMA bits/chip
    Rational ratio;     // r_t_cpi / r_t_c
};

// r_t_c = J*log2(M)/K,  r_t_cpi = J*(m1 + t*log2(M))/(n*K), exact rationals.
inline EfficiencyReport transmission_efficiency(int J, int K, int M, int n, int t) {
    const int bps = [&] {
        int b = 0;
        while ((1 << (b + 1)) <= M) ++b;
        if ((1 << b) != M) throw DomainError("transmission_efficiency: M must be a power of two");
        return b;
    }();
    const int m1 = index_bit_count(n, t);
    EfficiencyReport rep;
    rep.r_t_c = Rational::of(static_cast<long long>(J) * bps, K);
    rep.r_t_cpi = Rational::of(static_cast<long long>(J) * (m1 + t * bps),
                               static_cast<long long>(n) * K);
    rep.ratio = Rational::of(rep.r_t_cpi.num * rep.r_t_c.den, rep.r_t_cpi.den * rep.r_t_c.num);
    return rep;
}

// Two-exponential approximation Q(x) ~ (1/12)e^{-x^2/2} + (1/4)e^{-2x^2/3}.
inline double q_approx(double x) {
    if (x < 0.0) throw DomainError("q_approx: defined for x >= 0");
    return std::exp(-x * x / 2.0) / 12.0 + std::exp(-2.0 * x * x / 3.0) / 4.0;
}

// UPEP over unit-variance Rayleigh gains, from the two-exponential Q form via
// E[exp(-a|h|^2)] = 1/(1+a):
//   (1/12) prod_s 4N0/(4N0 + lambda_s^2) + (1/4) prod_s 3N0/(3N0 + lambda_s^2)
inline double upep(const std::vector<double>& lambda_sq, double noise_var) {
    if (!(noise_var > 0.0)) throw DomainError("upep: N0 must be positive");
    double p4 = 1.0, p3 = 1.0;
    for (double l2 : lambda_sq) {
        p4 *= 4.0 * noise_var / (4.0 * noise_var + l2);
        p3 *= 3.0 * noise_var / (3.0 * noise_var + l2);
    }
    return p4 / 12.0 + p3 / 4.0;
}

// The literal printed product form; kept for side-by-side comparison. It
// evaluates to 2^{len} at lambda = 0 and its denominators change sign for
// lambda_s^2 > 4N0, so it is not used as the expectation.
inline double upep_paper_literal(const std::vector<double>& lambda_sq, double noise_var) {
    if (!(noise_var > 0.0)) throw DomainError("upep_paper_literal: N0 must be positive");
    double p = 1.0;
    for (double l2 : lambda_sq)
        p *= noise_var * (48.0 * noise_var - 13.0 * l2) /
             ((4.0 * noise_var - l2) * (6.0 * noise_var - l2));
    return p;
}

// lambda_s^2 = sum_j |c^j[s] - chat^j[s]|^2 over the n*K frame chips.
inline std::vector<double> pairwise_lambda_sq(const std::vector<UserBlock>& sent,
                                              const std::vector<UserBlock>& detected,
                                              const Codebook& cb, int n) {
    const int K = cb.num_resources;
    std::vector<double> l2(n * K, 0.0);
    for (std::size_t j = 0; j < sent.size(); ++j)
        for (int s = 0; s < n * K; ++s)
            l2[s] += std::norm(sent[j].chip(cb, s, K) - detected[j].chip(cb, s, K));
    return l2;
}

// All 2^m1 * M^t legal blocks of one user, LUT-row major, symbol odometer.
inline std::vector<UserBlock> enumerate_legal_blocks(const IndexLut& lut, const Codebook& cb,
                                                     int user, double scale) {
    std::vector<UserBlock> out;
    for (const auto& row : lut.rows) {
        std::vector<int> c(lut.t, 0);
        while (true) {
            UserBlock b;
            b.user = user;
            b.scale = scale;
            b.slot_symbols.assign(lut.n, kInactiveSlot);
            for (int i = 0; i < lut.t; ++i) b.slot_symbols[row.slots[i]] = c[i];
            out.push_back(std::move(b));
            int i = lut.t - 1;
            for (; i >= 0; --i) {
                if (++c[i] < cb.num_symbols) break;
                c[i] = 0;
            }
            if (i < 0) break;
        }
    }
    return out;
}

struct BoundResult {
    double bound = 0.0;
    double std_err = 0.0;   // zero in exhaustive mode
    std::uint64_t evaluations = 0;
};

struct BoundSampling {
    bool exhaustive = true;
    std::uint64_t samples = 0;      // Monte Carlo draws when !exhaustive
    std::uint64_t seed = 1;
};

// Union bound on user j's average block error rate:
//   P_j(e) <= (1/N_b^J) sum_C sum_{Chat : chat^j != c^j} UPEP(C -> Chat)
// with N_b = 2^m1 * M^t legal blocks per user. Exhaustive enumeration is
// guarded at N_b^(2J) <= 1e7 pairs; Monte Carlo samples (C, Chat) pairs
// uniformly and reports the standard error of the estimate.
inline BoundResult abler_bound(const Codebook& cb, const IndexLut& lut, double noise_var,
                               int user, const BoundSampling& sampling, double scale) {
    const int J = cb.num_users;
    std::vector<std::vector<UserBlock>> blocks(J);
    for (int j = 0; j < J; ++j) blocks[j] = enumerate_legal_blocks(lut, cb, j, scale);
    const std::uint64_t nb = blocks[0].size();
    // terms in the inner sum for one C: chat^j ranges over nb-1, others over nb
    double inner_terms = static_cast<double>(nb - 1);
    for (int j = 0; j < J - 1; ++j) inner_terms *= static_cast<double>(nb);

    BoundResult res;
    if (sampling.exhaustive) {
        double pairs = 1.0;
        for (int i = 0; i < 2 * J; ++i) pairs *= static_cast<double>(nb);
        if (pairs > 1e7)
            throw DomainError("abler_bound: exhaustive enumeration exceeds the 1e7 pair guard");
        std::vector<std::size_t> c(J, 0), chat(J, 0);
        std::vector<UserBlock> sent(J), det(J);
        double total = 0.0;
        std::uint64_t outer = 1;
        for (int j = 0; j < J; ++j) outer *= nb;
        for (std::uint64_t ci = 0; ci < outer; ++ci) {
            for (int j = 0; j < J; ++j) sent[j] = blocks[j][c[j]];
            std::fill(chat.begin(), chat.end(), 0);
            for (std::uint64_t hi = 0; hi < outer; ++hi) {
                if (chat[user] != c[user]) {
                    for (int j = 0; j < J; ++j) det[j] = blocks[j][chat[j]];
                    total += upep(pairwise_lambda_sq(sent, det, cb, lut.n), noise_var);
                    ++res.evaluations;
                }
                for (int j = J - 1; j >= 0; --j) {
                    if (++chat[j] < nb) break;
                    chat[j] = 0;
                }
            }
            for (int j = J - 1; j >= 0; --j) {
                if (++c[j] < nb) break;
                c[j] = 0;
            }
        }
        res.bound = total / static_cast<double>(outer);
    } else {
        if (sampling.samples == 0) throw DomainError("abler_bound: sample count must be positive");
        Engine rng(derive_seed(sampling.seed, 0x0b0d, user));
        std::uniform_int_distribution<std::uint64_t> pick(0, nb - 1);
        std::uniform_int_distribution<std::uint64_t> pick_other(0, nb - 2);
        std::vector<UserBlock> sent(J), det(J);
        std::vector<std::uint64_t> idx(J);
        double sum = 0.0, sum_sq = 0.0;
        for (std::uint64_t i = 0; i < sampling.samples; ++i) {
            for (int j = 0; j < J; ++j) {
                idx[j] = pick(rng);
                sent[j] = blocks[j][idx[j]];
            }
            for (int j = 0; j < J; ++j) det[j] = blocks[j][pick(rng)];
            // user j's erroneous block is uniform over the nb-1 others
            std::uint64_t alt = pick_other(rng);
            if (alt >= idx[user]) ++alt;
            det[user] = blocks[user][alt];
            const double p = upep(pairwise_lambda_sq(sent, det, cb, lut.n), noise_var);
            sum += p;
            sum_sq += p * p;
            ++res.evaluations;
        }
        const double mean = sum / static_cast<double>(sampling.samples);
        const double var =
            std::max(0.0, sum_sq / static_cast<double>(sampling.samples) - mean * mean);
        res.bound = inner_terms * mean;
        res.std_err = inner_terms * std::sqrt(var / static_cast<double>(sampling.samples));
    }
    return res;
}

enum class PatternCounting {
    PerUserBlock,  // delta_gamma = case-gamma user blocks / all user blocks
    PerFrame,      // delta_gamma = frames with >= 1 case-gamma user / frames
};

struct PatternStats {
    std::uint64_t blocks = 0;  // denominator B
    std::vector<std::uint64_t> case_counts;  // index gamma = 0..n
    std::uint64_t reliable = 0;
    std::vector<double> delta;
    double reliable_ratio = 0.0;
    double mean_extra_search = 0.0;  // sum_gamma |psi| * delta_gamma
};

inline PatternStats pattern_stats(const std::vector<FrameDiagnostics>& frames, int n,
                                  PatternCounting counting = PatternCounting::PerUserBlock) {
    if (frames.empty()) throw DomainError("pattern_stats: need at least one diagnostic record");
    PatternStats st;
    st.case_counts.assign(n + 1, 0);
    std::uint64_t psi_sum = 0;
    std::uint64_t user_blocks = 0;
    for (const auto& f : frames) {
        std::vector<bool> seen(n + 1, false);
        bool all_reliable = true;
        for (const auto& u : f.users) {
            ++user_blocks;
            if (u.reliable) continue;
            all_reliable = false;
            psi_sum += u.candidate_count;
            if (counting == PatternCounting::PerUserBlock)
                ++st.case_counts[u.gamma];
            else
                seen[u.gamma] = true;
        }
        if (counting == PatternCounting::PerUserBlock) {
            st.reliable += std::count_if(f.users.begin(), f.users.end(),
                                         [](const UserDiag& u) { return u.reliable; });
        } else {
            for (int g = 0; g <= n; ++g)
                if (seen[g]) ++st.case_counts[g];
            if (all_reliable) ++st.reliable;
        }
    }
    st.blocks = counting == PatternCounting::PerUserBlock ? user_blocks : frames.size();
    st.delta.resize(n + 1);
    for (int g = 0; g <= n; ++g)
        st.delta[g] = static_cast<double>(st.case_counts[g]) / static_cast<double>(st.blocks);
    st.reliable_ratio = static_cast<double>(st.reliable) / static_cast<double>(st.blocks);
    // mean extra PML search size is always per user block (complexity per block)
    st.mean_extra_search = static_cast<double>(psi_sum) / static_cast<double>(user_blocks);
    return st;
}

}  // namespace cpiscma
