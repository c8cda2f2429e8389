// Codeword-position look-up table: m1-bit strings <-> active-slot index sets.
//
// The (4,2) table is pinned to the reference layout:
//   00 -> {1,3}   01 -> {2,4}   10 -> {2,3}   11 -> {1,4}     (1-based slots)
// All other shapes take the first 2^m1 size-t subsets in lexicographic order
// of their sorted index tuples, paired with bit strings counting up from
// all-zeros. An override file can replace the built-in rule.
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cpiscma/types.hpp"

namespace cpiscma {

inline std::uint64_t binomial(int n, int t) {
    if (t < 0 || t > n) return 0;
    t = std::min(t, n - t);
    std::uint64_t r = 1;
    for (int i = 1; i <= t; ++i) {
        // exact at every step: r holds C(n-t+i-1, i-1) * ... pattern
        r = r * static_cast<std::uint64_t>(n - t + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

inline int index_bit_count(int n, int t) {
    if (t < 1 || t > n) throw DomainError("index_bit_count: need 1 <= t <= n");
    const std::uint64_t c = binomial(n, t);
    return std::bit_width(c) - 1;  // floor(log2(c)), 0 when c == 1
}

struct LutRow {
    Bits bits;               // m1 bits, MSB first
    std::vector<int> slots;  // sorted, 0-based, size t
};

struct IndexLut {
    int n = 0;
    int t = 0;
    int m1 = 0;
    std::vector<LutRow> rows;  // 2^m1 rows; row r carries the bits of value r

    const std::vector<int>& slots_for(std::uint32_t bit_value) const {
        return rows[bit_value].slots;
    }
    std::optional<std::uint32_t> row_of(const std::vector<int>& sorted_slots) const {
        const auto it = by_slots_.find(sorted_slots);
        if (it == by_slots_.end()) return std::nullopt;
        return it->second;
    }
    void rebuild_index() {
        by_slots_.clear();
        for (std::uint32_t r = 0; r < rows.size(); ++r) by_slots_[rows[r].slots] = r;
    }

  private:
    std::map<std::vector<int>, std::uint32_t> by_slots_;
};

namespace detail {

inline Bits bits_of_value(std::uint32_t v, int width) {
    Bits b(width);
    for (int i = 0; i < width; ++i) b[i] = (v >> (width - 1 - i)) & 1u;
    return b;
}

inline std::uint32_t value_of_bits(const Bits& b) {
    std::uint32_t v = 0;
    for (auto bit : b) v = (v << 1) | (bit & 1u);
    return v;
}

inline void validate_lut(IndexLut& lut) {
    const std::uint32_t expect_rows = 1u << lut.m1;
    if (lut.m1 != index_bit_count(lut.n, lut.t))
        throw ValidationError("lut: m1 must equal floor(log2(C(n,t)))");
    if (lut.rows.size() != expect_rows)
        throw ValidationError("lut: expected " + std::to_string(expect_rows) + " rows");
    std::vector<bool> seen(expect_rows, false);
    std::map<std::vector<int>, int> sets;
    for (auto& row : lut.rows) {
        if (static_cast<int>(row.bits.size()) != lut.m1)
            throw ValidationError("lut: bit string \"" + bits_to_string(row.bits) +
                                  "\" is not " + std::to_string(lut.m1) + " bits");
        const std::uint32_t v = value_of_bits(row.bits);
        if (seen[v]) throw ValidationError("lut: duplicate bit string " + bits_to_string(row.bits));
        seen[v] = true;
        if (static_cast<int>(row.slots.size()) != lut.t)
            throw ValidationError("lut: index set for " + bits_to_string(row.bits) +
                                  " does not have t = " + std::to_string(lut.t) + " slots");
        for (int s : row.slots)
            if (s < 0 || s >= lut.n)
                throw ValidationError("lut: slot index out of range in row " +
                                      bits_to_string(row.bits));
        if (!std::is_sorted(row.slots.begin(), row.slots.end()) ||
            std::adjacent_find(row.slots.begin(), row.slots.end()) != row.slots.end())
            throw ValidationError("lut: slot set must be strictly increasing in row " +
                                  bits_to_string(row.bits));
        if (sets.count(row.slots))
            throw ValidationError("lut: duplicate index set in row " + bits_to_string(row.bits));
        sets[row.slots] = 1;
    }
    // rows stored in bit-value order
    std::sort(lut.rows.begin(), lut.rows.end(), [](const LutRow& a, const LutRow& b) {
        return value_of_bits(a.bits) < value_of_bits(b.bits);
    });
    lut.rebuild_index();
}

}  // namespace detail

inline IndexLut build_lut(int n, int t) {
    IndexLut lut;
    lut.n = n;
    lut.t = t;
    lut.m1 = index_bit_count(n, t);
    const std::uint32_t num_rows = 1u << lut.m1;

    if (n == 4 && t == 2) {
        lut.rows = {{detail::bits_of_value(0, 2), {0, 2}},
                    {detail::bits_of_value(1, 2), {1, 3}},
                    {detail::bits_of_value(2, 2), {1, 2}},
                    {detail::bits_of_value(3, 2), {0, 3}}};
    } else {
        std::vector<int> combo(t);
        for (int i = 0; i < t; ++i) combo[i] = i;
        for (std::uint32_t r = 0; r < num_rows; ++r) {
            lut.rows.push_back({detail::bits_of_value(r, lut.m1), combo});
            // advance to the next t-combination of {0..n-1} in lexicographic order
            int i = t - 1;
            while (i >= 0 && combo[i] == n - t + i) --i;
            if (i < 0) break;
            ++combo[i];
            for (int l = i + 1; l < t; ++l) combo[l] = combo[l - 1] + 1;
        }
    }
    detail::validate_lut(lut);
    return lut;
}

inline const std::vector<int>& bits_to_indices(const IndexLut& lut, const Bits& bits) {
    if (static_cast<int>(bits.size()) != lut.m1)
        throw DomainError("bits_to_indices: expected " + std::to_string(lut.m1) + " bits, got " +
                          std::to_string(bits.size()));
    return lut.slots_for(detail::value_of_bits(bits));
}

// Returns the matching row's bits, or nullopt when the index set is one of
// the C(n,t) - 2^m1 excluded sets.
inline std::optional<Bits> indices_to_bits(const IndexLut& lut, std::vector<int> indices) {
    if (static_cast<int>(indices.size()) != lut.t)
        throw DomainError("indices_to_bits: expected a size-" + std::to_string(lut.t) + " set");
    std::sort(indices.begin(), indices.end());
    const auto row = lut.row_of(indices);
    if (!row) return std::nullopt;
    return lut.rows[*row].bits;
}

// Override file: one row per line, "bits -> i1,i2,..." with 1-based indices.
// '#' starts a comment. The full row set must satisfy every LUT invariant.
inline IndexLut parse_lut_file(const std::string& text, int n, int t, const std::string& origin) {
    IndexLut lut;
    lut.n = n;
    lut.t = t;
    lut.m1 = index_bit_count(n, t);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string trimmed;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
        if (trimmed.empty()) continue;
        const auto arrow = trimmed.find("->");
        if (arrow == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected \"bits -> indices\"");
        LutRow row;
        for (char c : trimmed.substr(0, arrow)) {
            if (c != '0' && c != '1')
                throw ParseError(origin + ":" + std::to_string(lineno) + ": bad bit '" +
                                 std::string(1, c) + "'");
            row.bits.push_back(c == '1');
        }
        std::stringstream idx(trimmed.substr(arrow + 2));
        std::string tok;
        while (std::getline(idx, tok, ',')) {
            try {
                row.slots.push_back(std::stoi(tok) - 1);
            } catch (const std::exception&) {
                throw ParseError(origin + ":" + std::to_string(lineno) + ": bad index \"" + tok + "\"");
            }
        }
        std::sort(row.slots.begin(), row.slots.end());
        lut.rows.push_back(std::move(row));
    }
    try {
        detail::validate_lut(lut);
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return lut;
}

inline IndexLut load_lut_file(const std::string& path, int n, int t) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open LUT file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_lut_file(ss.str(), n, t, path);
}

}  // namespace cpiscma
