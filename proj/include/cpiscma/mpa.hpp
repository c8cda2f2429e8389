// Modified message passing over the user/resource factor graph of one slot.
//
// With augment_zero on, each user's alphabet is {zero, symbol 1..M}; the zero
// entry models an inactive codeword position and lets the detector read the
// position indices off the slot decisions. With it off this is the standard
// SCMA MPA over M symbols.
//
// Function-node updates sum the Gaussian likelihood of y_k over all
// alphabet^(d_f - 1) combinations of the other users at that resource,
// weighted by their incoming messages. Likelihoods are evaluated once per
// slot in the log domain and max-normalized before exponentiation; messages
// are renormalized in the linear domain after every update.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "cpiscma/codebook.hpp"
#include "cpiscma/types.hpp"

namespace cpiscma {

struct MpaParams {
    int iterations = 6;
    bool augment_zero = true;
    double n0_floor = 1e-12;
    // optional prior over the alphabet (e.g. zero-probability (n-t)/n);
    // empty means uniform, matching the plain FN/UN update rules
    std::vector<double> prior;
};

// Messages indexed [resource][local neighbor][alphabet entry].
struct MessageTable {
    std::vector<std::vector<std::vector<double>>> fn_to_un;  // U
    std::vector<std::vector<std::vector<double>>> un_to_fn;  // V
    std::vector<std::vector<double>> beliefs;                // per user
};

// Per-slot decisions for all users: -1 = zero, otherwise 0-based symbol.
struct SlotDecision {
    std::vector<int> entries;
    std::vector<std::vector<double>> posteriors;  // length M+1 (or M) each
};

struct MpaCost {
    std::uint64_t gaussian_evals = 0;   // likelihood-table entries built
    std::uint64_t fn_combo_terms = 0;   // (edge, hypothesis, combination) accumulations
};

namespace detail {

inline int alphabet_size(const Codebook& cb, bool augment_zero) {
    return cb.num_symbols + (augment_zero ? 1 : 0);
}

inline cplx entry_value(const Codebook& cb, bool augment_zero, double scale, int user, int a,
                        int k) {
    if (augment_zero) {
        if (a == 0) return {0.0, 0.0};
        return scale * cb.entries[user][a - 1][k];
    }
    return scale * cb.entries[user][a][k];
}

inline int entry_to_decision(bool augment_zero, int a) {
    return augment_zero ? a - 1 : a;  // a==0 maps to -1 (zero) when augmented
}

inline void normalize_or_uniform(std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    if (sum > 0.0 && std::isfinite(sum)) {
        for (double& x : v) x /= sum;
    } else {
        const double u = 1.0 / static_cast<double>(v.size());
        for (double& x : v) x = u;
    }
}

}  // namespace detail

// Likelihood terms accumulated per (resource, user, hypothesis) in one FN
// update; the paper-order cost of the modified MPA is alphabet^d_f per node.
inline std::uint64_t fn_terms_per_hypothesis(int alphabet, int d_f) {
    std::uint64_t c = 1;
    for (int i = 0; i < d_f - 1; ++i) c *= static_cast<std::uint64_t>(alphabet);
    return c;
}

inline SlotDecision run_mpa_slot(
    const cvec& y_slot, const std::vector<cvec>& h_slot, const Codebook& cb,
    const FactorGraph& fg, double noise_var, double scale, const MpaParams& params,
    MessageTable* trace = nullptr, MpaCost* cost = nullptr,
    const std::function<void(int, const MessageTable&)>& on_iteration = {}) {
    const int K = cb.num_resources;
    const int J = cb.num_users;
    const int A = detail::alphabet_size(cb, params.augment_zero);
    if (static_cast<int>(y_slot.size()) != K) throw DomainError("run_mpa_slot: y_slot must have K chips");
    if (static_cast<int>(h_slot.size()) != J) throw DomainError("run_mpa_slot: h_slot must cover J users");
    if (!(noise_var > 0.0))
        throw DomainError("run_mpa_slot: N0 must be positive (floor noiseless inputs first)");
    if (params.iterations < 1) throw DomainError("run_mpa_slot: iterations must be >= 1");
    if (!params.prior.empty() && static_cast<int>(params.prior.size()) != A)
        throw DomainError("run_mpa_slot: prior length must match the alphabet");

    std::vector<double> prior(params.prior);
    if (!prior.empty()) detail::normalize_or_uniform(prior);

    // per-resource likelihood tables over all alphabet^d_f joint combinations
    std::vector<std::vector<double>> lik(K);
    std::vector<std::vector<std::vector<cplx>>> contrib(K);  // [k][local][a]
    MpaCost local_cost;
    for (int k = 0; k < K; ++k) {
        const auto& users = fg.fn_neighbors[k];
        const int d = static_cast<int>(users.size());
        contrib[k].assign(d, std::vector<cplx>(A));
        for (int i = 0; i < d; ++i)
            for (int a = 0; a < A; ++a)
                contrib[k][i][a] =
                    h_slot[users[i]][k] * detail::entry_value(cb, params.augment_zero, scale, users[i], a, k);
        std::uint64_t combos = 1;
        for (int i = 0; i < d; ++i) combos *= static_cast<std::uint64_t>(A);
        std::vector<double> ll(combos);
        std::vector<int> c(d, 0);
        double max_ll = -std::numeric_limits<double>::infinity();
        for (std::uint64_t lin = 0; lin < combos; ++lin) {
            cplx sum{0.0, 0.0};
            for (int i = 0; i < d; ++i) sum += contrib[k][i][c[i]];
            const double val = -std::norm(y_slot[k] - sum) / noise_var;
            ll[lin] = val;
            if (val > max_ll) max_ll = val;
            for (int i = d - 1; i >= 0; --i) {
                if (++c[i] < A) break;
                c[i] = 0;
            }
        }
        lik[k].resize(combos);
        for (std::uint64_t lin = 0; lin < combos; ++lin) lik[k][lin] = std::exp(ll[lin] - max_ll);
        local_cost.gaussian_evals += combos;
    }

    MessageTable mt;
    mt.fn_to_un.resize(K);
    mt.un_to_fn.resize(K);
    for (int k = 0; k < K; ++k) {
        const int d = static_cast<int>(fg.fn_neighbors[k].size());
        mt.fn_to_un[k].assign(d, std::vector<double>(A, 1.0 / A));
        std::vector<double> init = prior.empty() ? std::vector<double>(A, 1.0 / A) : prior;
        mt.un_to_fn[k].assign(d, init);
    }
    // edge list per user: (resource, local index at that resource)
    std::vector<std::vector<std::pair<int, int>>> un_edges(J);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < static_cast<int>(fg.fn_neighbors[k].size()); ++i)
            un_edges[fg.fn_neighbors[k][i]].push_back({k, i});

    for (int iter = 0; iter < params.iterations; ++iter) {
        // FN update
        for (int k = 0; k < K; ++k) {
            const int d = static_cast<int>(fg.fn_neighbors[k].size());
            if (d == 0) continue;
            for (auto& edge : mt.fn_to_un[k]) std::fill(edge.begin(), edge.end(), 0.0);
            std::vector<int> c(d, 0);
            const std::uint64_t combos = lik[k].size();
            for (std::uint64_t lin = 0; lin < combos; ++lin) {
                const double w = lik[k][lin];
                for (int i = 0; i < d; ++i) {
                    double prod = w;
                    for (int l = 0; l < d; ++l)
                        if (l != i) prod *= mt.un_to_fn[k][l][c[l]];
                    mt.fn_to_un[k][i][c[i]] += prod;
                }
                local_cost.fn_combo_terms += static_cast<std::uint64_t>(d);
                for (int i = d - 1; i >= 0; --i) {
                    if (++c[i] < A) break;
                    c[i] = 0;
                }
            }
            for (auto& edge : mt.fn_to_un[k]) detail::normalize_or_uniform(edge);
        }
        // UN update
        for (int j = 0; j < J; ++j) {
            for (const auto& [k, loc] : un_edges[j]) {
                auto& v = mt.un_to_fn[k][loc];
                for (int a = 0; a < A; ++a) {
                    double prod = prior.empty() ? 1.0 : prior[a];
                    for (const auto& [l, lloc] : un_edges[j])
                        if (l != k) prod *= mt.fn_to_un[l][lloc][a];
                    v[a] = prod;
                }
                detail::normalize_or_uniform(v);
            }
        }
        if (on_iteration) on_iteration(iter, mt);
    }

    // beliefs and decisions
    mt.beliefs.assign(J, std::vector<double>(A));
    SlotDecision out;
    out.entries.resize(J);
    out.posteriors.resize(J);
    for (int j = 0; j < J; ++j) {
        for (int a = 0; a < A; ++a) {
            double prod = prior.empty() ? 1.0 : prior[a];
            for (const auto& [k, loc] : un_edges[j]) prod *= mt.fn_to_un[k][loc][a];
            mt.beliefs[j][a] = prod;
        }
        detail::normalize_or_uniform(mt.beliefs[j]);
        int best = 0;
        for (int a = 1; a < A; ++a)
            if (mt.beliefs[j][a] > mt.beliefs[j][best]) best = a;  // ties keep the lower entry
        out.entries[j] = detail::entry_to_decision(params.augment_zero, best);
        out.posteriors[j] = mt.beliefs[j];
    }
    if (trace) *trace = mt;
    if (cost) *cost = local_cost;
    return out;
}

// Brute-force joint ML over the whole slot; the reference the detector is
// measured against in tests, and the search whose cost the modified MPA
// undercuts.
inline std::vector<int> exhaustive_slot_ml(const cvec& y_slot, const std::vector<cvec>& h_slot,
                                           const Codebook& cb, double scale, bool augment_zero) {
    const int K = cb.num_resources;
    const int J = cb.num_users;
    const int A = detail::alphabet_size(cb, augment_zero);
    if (J > 8 || cb.num_symbols > 8)
        throw DomainError("exhaustive_slot_ml: search space guard requires J <= 8 and M <= 8");
    if (static_cast<int>(y_slot.size()) != K) throw DomainError("exhaustive_slot_ml: bad y_slot size");

    std::vector<std::vector<cvec>> contrib(J, std::vector<cvec>(A, cvec(K)));
    for (int j = 0; j < J; ++j)
        for (int a = 0; a < A; ++a)
            for (int k = 0; k < K; ++k)
                contrib[j][a][k] = h_slot[j][k] * detail::entry_value(cb, augment_zero, scale, j, a, k);

    std::vector<int> c(J, 0), best(J, 0);
    double best_d = std::numeric_limits<double>::infinity();
    std::uint64_t total = 1;
    for (int j = 0; j < J; ++j) total *= static_cast<std::uint64_t>(A);
    cvec sum(K);
    for (std::uint64_t lin = 0; lin < total; ++lin) {
        std::fill(sum.begin(), sum.end(), cplx{0.0, 0.0});
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k) sum[k] += contrib[j][c[j]][k];
        double d2 = 0.0;
        for (int k = 0; k < K; ++k) d2 += std::norm(y_slot[k] - sum[k]);
        if (d2 < best_d) {
            best_d = d2;
            best = c;
        }
        for (int j = J - 1; j >= 0; --j) {
            if (++c[j] < A) break;
            c[j] = 0;
        }
    }
    std::vector<int> out(J);
    for (int j = 0; j < J; ++j) out[j] = detail::entry_to_decision(augment_zero, best[j]);
    return out;
}

}  // namespace cpiscma
