// SCMA codebook loading, validation and factor-graph construction.
//
// Codebook file schema (strict, unknown fields rejected):
//   {
//     "name": "optional label",
//     "J": <users>, "K": <chips per codeword>, "M": <codewords per user>,
//     "codewords": [user][symbol] -> list of K [re, im] pairs
//   }
// Structural zeros are exact [0, 0] entries; the set of nonzero chip
// positions must be identical across one user's M codewords.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpiscma/types.hpp"

namespace cpiscma {

struct Codebook {
    int num_users = 0;      // J
    int num_resources = 0;  // K
    int num_symbols = 0;    // M
    // entries[j][m] is a K-vector; symbol indices are 0-based internally
    std::vector<std::vector<cvec>> entries;
    // set when the source document's codeword norms were off by > 1e-9
    bool renormalized = false;

    const cvec& codeword(int user, int symbol) const { return entries[user][symbol]; }

    std::vector<int> support(int user) const {
        std::vector<int> s;
        for (int k = 0; k < num_resources; ++k)
            if (entries[user][0][k] != cplx{0.0, 0.0}) s.push_back(k);
        return s;
    }
};

struct FactorGraph {
    std::vector<std::vector<int>> fn_neighbors;  // per resource k: users active at k
    std::vector<std::vector<int>> un_neighbors;  // per user j: resources occupied by j
    std::vector<int> fn_degree;                  // d_f per resource
    std::vector<int> un_degree;                  // d_v per user
};

namespace detail {

inline double sq_norm(const cvec& v) {
    double e = 0.0;
    for (const auto& c : v) e += std::norm(c);
    return e;
}

}  // namespace detail

inline FactorGraph build_factor_graph(const Codebook& cb) {
    FactorGraph fg;
    fg.fn_neighbors.assign(cb.num_resources, {});
    fg.un_neighbors.assign(cb.num_users, {});
    for (int j = 0; j < cb.num_users; ++j)
        for (int k : cb.support(j)) {
            fg.fn_neighbors[k].push_back(j);
            fg.un_neighbors[j].push_back(k);
        }
    fg.fn_degree.resize(cb.num_resources);
    fg.un_degree.resize(cb.num_users);
    for (int k = 0; k < cb.num_resources; ++k)
        fg.fn_degree[k] = static_cast<int>(fg.fn_neighbors[k].size());
    for (int j = 0; j < cb.num_users; ++j)
        fg.un_degree[j] = static_cast<int>(fg.un_neighbors[j].size());
    return fg;
}

// Enforces the codebook invariants. Renormalizes codewords to unit energy
// (setting cb.renormalized) when the source norms are off by more than 1e-9.
inline void validate_codebook(Codebook& cb) {
    if (cb.num_users < 1 || cb.num_resources < 1 || cb.num_symbols < 1)
        throw ValidationError("codebook: J, K, M must all be >= 1");

    for (int j = 0; j < cb.num_users; ++j) {
        std::vector<int> sup0;
        for (int m = 0; m < cb.num_symbols; ++m) {
            std::vector<int> sup;
            for (int k = 0; k < cb.num_resources; ++k)
                if (cb.entries[j][m][k] != cplx{0.0, 0.0}) sup.push_back(k);
            if (m == 0)
                sup0 = sup;
            else if (sup != sup0)
                throw ValidationError("codebook: user " + std::to_string(j + 1) +
                                      " has an inconsistent sparsity pattern across symbols");
        }
        if (sup0.empty())
            throw ValidationError("codebook: user " + std::to_string(j + 1) +
                                  " has an all-zero codeword");
        if (static_cast<int>(sup0.size()) == cb.num_resources)
            throw ValidationError("codebook: user " + std::to_string(j + 1) +
                                  " has no zero chip (codewords must be sparse)");
    }

    FactorGraph fg = build_factor_graph(cb);
    for (int k = 0; k < cb.num_resources; ++k)
        if (fg.fn_degree[k] == 0)
            throw ValidationError("codebook: resource " + std::to_string(k + 1) +
                                  " has no users");

    const int dv = fg.un_degree[0];
    const int df = fg.fn_degree[0];
    const bool regular =
        std::all_of(fg.un_degree.begin(), fg.un_degree.end(), [&](int d) { return d == dv; }) &&
        std::all_of(fg.fn_degree.begin(), fg.fn_degree.end(), [&](int d) { return d == df; });
    if (!regular || cb.num_users * dv != cb.num_resources * df)
        throw ValidationError("codebook: irregular overload inconsistency (J*d_v != K*d_f)");

    bool off = false;
    for (int j = 0; j < cb.num_users && !off; ++j)
        for (int m = 0; m < cb.num_symbols && !off; ++m)
            if (std::abs(detail::sq_norm(cb.entries[j][m]) - 1.0) > 1e-9) off = true;
    if (off) {
        for (auto& user : cb.entries)
            for (auto& cw : user) {
                const double nrm = std::sqrt(detail::sq_norm(cw));
                for (auto& c : cw) c /= nrm;
            }
        cb.renormalized = true;
    }
}

inline Codebook parse_codebook(const std::string& text, const std::string& origin) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(origin + ": top-level value must be an object");
    for (const auto& [key, _] : doc.items())
        if (key != "J" && key != "K" && key != "M" && key != "codewords" && key != "name")
            throw ParseError(origin + ": unknown field \"" + key + "\"");
    for (const char* field : {"J", "K", "M", "codewords"})
        if (!doc.contains(field))
            throw ParseError(origin + ": missing field \"" + std::string(field) + "\"");

    Codebook cb;
    try {
        cb.num_users = doc.at("J").get<int>();
        cb.num_resources = doc.at("K").get<int>();
        cb.num_symbols = doc.at("M").get<int>();
        const auto& cw = doc.at("codewords");
        if (static_cast<int>(cw.size()) != cb.num_users)
            throw ParseError(origin + ": codewords has " + std::to_string(cw.size()) +
                             " users, J = " + std::to_string(cb.num_users));
        cb.entries.resize(cb.num_users);
        for (int j = 0; j < cb.num_users; ++j) {
            if (static_cast<int>(cw[j].size()) != cb.num_symbols)
                throw ParseError(origin + ": user " + std::to_string(j + 1) + " has " +
                                 std::to_string(cw[j].size()) + " codewords, M = " +
                                 std::to_string(cb.num_symbols));
            cb.entries[j].resize(cb.num_symbols);
            for (int m = 0; m < cb.num_symbols; ++m) {
                const auto& vec = cw[j][m];
                if (static_cast<int>(vec.size()) != cb.num_resources)
                    throw ParseError(origin + ": codewords[" + std::to_string(j + 1) + "][" +
                                     std::to_string(m + 1) + "] is not a K-vector");
                cb.entries[j][m].resize(cb.num_resources);
                for (int k = 0; k < cb.num_resources; ++k) {
                    const auto& pair = vec[k];
                    if (!pair.is_array() || pair.size() != 2)
                        throw ParseError(origin + ": chip " + std::to_string(k + 1) + " of codewords[" +
                                         std::to_string(j + 1) + "][" + std::to_string(m + 1) +
                                         "] is not a [re, im] pair");
                    cb.entries[j][m][k] = cplx(pair[0].get<double>(), pair[1].get<double>());
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    validate_codebook(cb);
    return cb;
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open codebook file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_codebook(ss.str(), path);
}

inline nlohmann::json codebook_to_json(const Codebook& cb) {
    nlohmann::json users = nlohmann::json::array();
    for (int j = 0; j < cb.num_users; ++j) {
        nlohmann::json symbols = nlohmann::json::array();
        for (int m = 0; m < cb.num_symbols; ++m) {
            nlohmann::json vec = nlohmann::json::array();
            for (int k = 0; k < cb.num_resources; ++k)
                vec.push_back({cb.entries[j][m][k].real(), cb.entries[j][m][k].imag()});
            symbols.push_back(std::move(vec));
        }
        users.push_back(std::move(symbols));
    }
    return nlohmann::json{
        {"J", cb.num_users}, {"K", cb.num_resources}, {"M", cb.num_symbols}, {"codewords", users}};
}

inline void save_codebook(const Codebook& cb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << codebook_to_json(cb).dump(1) << '\n';
}

}  // namespace cpiscma
