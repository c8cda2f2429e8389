#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace cpiscma;
using testsup::bits_from_string;

TEST_CASE("index bit counts") {
    CHECK(index_bit_count(4, 2) == 2);
    CHECK(index_bit_count(4, 3) == 2);
    CHECK(index_bit_count(2, 1) == 1);
    CHECK(index_bit_count(8, 7) == 3);
    CHECK(index_bit_count(1, 1) == 0);  // C(1,1) = 1
    CHECK_THROWS_AS(index_bit_count(4, 5), DomainError);
    CHECK_THROWS_AS(index_bit_count(4, 0), DomainError);
}

TEST_CASE("the (4,2) table matches the reference row for row") {
    const IndexLut lut = build_lut(4, 2);
    REQUIRE(lut.rows.size() == 4);
    // 1-based slot sets: 00->{1,3}, 01->{2,4}, 10->{2,3}, 11->{1,4}
    CHECK(lut.rows[0].slots == std::vector<int>{0, 2});
    CHECK(lut.rows[1].slots == std::vector<int>{1, 3});
    CHECK(lut.rows[2].slots == std::vector<int>{1, 2});
    CHECK(lut.rows[3].slots == std::vector<int>{0, 3});
    for (std::uint32_t r = 0; r < 4; ++r) {
        CHECK(lut.rows[r].bits == Bits{static_cast<std::uint8_t>((r >> 1) & 1),
                                       static_cast<std::uint8_t>(r & 1)});
    }
}

TEST_CASE("(4,3) enumerates all four triples in lexicographic order") {
    const IndexLut lut = build_lut(4, 3);
    REQUIRE(lut.rows.size() == 4);
    CHECK(lut.rows[0].slots == std::vector<int>{0, 1, 2});
    CHECK(lut.rows[1].slots == std::vector<int>{0, 1, 3});
    CHECK(lut.rows[2].slots == std::vector<int>{0, 2, 3});
    CHECK(lut.rows[3].slots == std::vector<int>{1, 2, 3});
}

TEST_CASE("(2,1) is the two-slot toggle") {
    const IndexLut lut = build_lut(2, 1);
    REQUIRE(lut.rows.size() == 2);
    CHECK(lut.rows[0].slots == std::vector<int>{0});
    CHECK(lut.rows[1].slots == std::vector<int>{1});
}

TEST_CASE("bit string lookups") {
    const IndexLut lut = build_lut(4, 2);
    CHECK(bits_to_indices(lut, bits_from_string("10")) == std::vector<int>{1, 2});
    CHECK(bits_to_indices(lut, bits_from_string("00")) == std::vector<int>{0, 2});
    const IndexLut lut21 = build_lut(2, 1);
    CHECK(bits_to_indices(lut21, bits_from_string("1")) == std::vector<int>{1});
    CHECK_THROWS_AS(bits_to_indices(lut, bits_from_string("101")), DomainError);
}

TEST_CASE("index set lookups and LUT exclusions") {
    const IndexLut lut = build_lut(4, 2);
    CHECK(indices_to_bits(lut, {0, 3}) == bits_from_string("11"));
    CHECK_FALSE(indices_to_bits(lut, {0, 1}).has_value());  // excluded set {1,2}
    CHECK_FALSE(indices_to_bits(lut, {2, 3}).has_value());  // excluded set {3,4}
    CHECK(indices_to_bits(build_lut(2, 1), {0}) == bits_from_string("0"));
    CHECK_THROWS_AS(indices_to_bits(lut, {0, 1, 2}), DomainError);
}

TEST_CASE("bits<->indices are mutually inverse on every row") {
    const std::pair<int, int> shapes[] = {{4, 2}, {4, 3}, {2, 1}, {8, 7}, {5, 2},
                                          {6, 3}, {7, 1}, {9, 4}, {10, 5}, {1, 1}};
    for (auto [n, t] : shapes) {
        const IndexLut lut = build_lut(n, t);
        CHECK(static_cast<int>(lut.rows.size()) == (1 << lut.m1));
        for (const auto& row : lut.rows) {
            CHECK(bits_to_indices(lut, row.bits) == row.slots);
            CHECK(indices_to_bits(lut, row.slots) == row.bits);
        }
        // excluded sets are exactly C(n,t) - 2^m1
        const auto excluded =
            binomial(n, t) - (std::uint64_t{1} << lut.m1);
        if (n == 4 && t == 2) CHECK(excluded == 2);
        if (n == 4 && t == 3) CHECK(excluded == 0);
        std::vector<int> combo(t);
        for (int i = 0; i < t; ++i) combo[i] = i;
        std::uint64_t missing = 0;
        while (true) {
            if (!lut.row_of(combo)) ++missing;
            int i = t - 1;
            while (i >= 0 && combo[i] == n - t + i) --i;
            if (i < 0) break;
            ++combo[i];
            for (int l = i + 1; l < t; ++l) combo[l] = combo[l - 1] + 1;
        }
        CHECK(missing == excluded);
    }
}

TEST_CASE("override file parsing and validation") {
    const IndexLut lut = parse_lut_file("# comment\n00 -> 1,3\n01 -> 2,4\n10 -> 2,3\n11 -> 1,4\n",
                                        4, 2, "override");
    CHECK(lut.rows[2].slots == std::vector<int>{1, 2});

    CHECK_THROWS_AS(parse_lut_file("00 -> 1,3\n", 4, 2, "short"), ValidationError);
    CHECK_THROWS_AS(
        parse_lut_file("00 -> 1,3\n01 -> 2,4\n10 -> 2,3\n11 -> 1,3\n", 4, 2, "dup"),
        ValidationError);
    CHECK_THROWS_AS(
        parse_lut_file("00 -> 1,5\n01 -> 2,4\n10 -> 2,3\n11 -> 1,4\n", 4, 2, "range"),
        ValidationError);
    CHECK_THROWS_AS(parse_lut_file("00 1,3\n", 4, 2, "arrow"), ParseError);
}
