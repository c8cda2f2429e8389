// Shared aliases and error types.
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpiscma {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using Bits = std::vector<std::uint8_t>;  // each element 0 or 1

// Malformed input document (codebook / LUT / config files).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally well-formed input that violates an invariant.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline std::string bits_to_string(const Bits& b) {
    std::string s;
    s.reserve(b.size());
    for (auto v : b) s.push_back(v ? '1' : '0');
    return s;
}

}  // namespace cpiscma
