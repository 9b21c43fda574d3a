#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace kroa {

/// Exponent vector of a monomial x^k = x_1^{k_1} ... x_n^{k_n}.
struct MultiIndex {
    std::vector<std::uint32_t> k;

    MultiIndex() = default;
    explicit MultiIndex(std::size_t n) : k(n, 0) {}
    MultiIndex(std::initializer_list<std::uint32_t> init) : k(init) {}

    std::size_t dim() const { return k.size(); }

    std::uint32_t degree() const {
        return std::accumulate(k.begin(), k.end(), std::uint32_t{0});
    }

    bool is_zero() const {
        for (auto e : k)
            if (e != 0) return false;
        return true;
    }

    std::uint32_t operator[](std::size_t i) const { return k[i]; }
    std::uint32_t& operator[](std::size_t i) { return k[i]; }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.k == b.k; }
    friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return a.k != b.k; }

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(k[i]);
        }
        return s + ")";
    }
};

/// The canonical term ordering: total degree first, lexicographic tie-break.
struct GradedLexLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        const auto da = a.degree();
        const auto db = b.degree();
        if (da != db) return da < db;
        return a.k < b.k;
    }
};

inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
    return GradedLexLess{}(a, b);
}

/// C(a, b) as an exact integer; throws std::overflow_error when the value
/// does not fit in 64 bits.
inline std::uint64_t binomial_checked(std::uint64_t a, std::uint64_t b) {
    if (b > a) return 0;
    if (b > a - b) b = a - b;
    unsigned __int128 c = 1;
    for (std::uint64_t i = 1; i <= b; ++i) {
        c *= (a - b + i);
        c /= i;  // exact: C(a-b+i, i) is an integer
        if (c > static_cast<unsigned __int128>(UINT64_MAX))
            throw std::overflow_error("binomial_checked: C(" + std::to_string(a) + "," +
                                      std::to_string(b) + ") exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(c);
}

/// Number of degree-k monomials in n variables, C(n+k-1, k).
inline std::uint64_t multiset_coeff(std::size_t n, std::uint32_t k) {
    if (n < 1) throw std::invalid_argument("multiset_coeff: n must be >= 1");
    return binomial_checked(static_cast<std::uint64_t>(n) + k - 1, k);
}

namespace detail {
inline void enumerate_degree(std::size_t n, std::uint32_t d, MultiIndex& scratch, std::size_t pos,
                             std::vector<MultiIndex>& out) {
    if (pos + 1 == n) {
        scratch[pos] = d;
        out.push_back(scratch);
        return;
    }
    for (std::uint32_t e = 0; e <= d; ++e) {
        scratch[pos] = e;
        enumerate_degree(n, d - e, scratch, pos + 1, out);
    }
}
}  // namespace detail

/// All exponent vectors with |k| <= N, in graded-lex order; the result has
/// exactly C(n+N, n) entries and starts with the zero index.
inline std::vector<MultiIndex> enumerate_indices(std::size_t n, std::uint32_t N) {
    if (n < 1) throw std::invalid_argument("enumerate_indices: n must be >= 1");
    const std::uint64_t count = binomial_checked(static_cast<std::uint64_t>(n) + N, n);
    constexpr std::uint64_t kMaxIndices = 50'000'000;
    if (count > kMaxIndices)
        throw std::length_error("enumerate_indices: basis size " + std::to_string(count) +
                                " exceeds capacity " + std::to_string(kMaxIndices));
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(count));
    MultiIndex scratch(n);
    for (std::uint32_t d = 0; d <= N; ++d) detail::enumerate_degree(n, d, scratch, 0, out);
    return out;
}

/// Exponent vectors of exact total degree d, in lex order (the degree-d slice
/// of enumerate_indices).
inline std::vector<MultiIndex> enumerate_degree_indices(std::size_t n, std::uint32_t d) {
    if (n < 1) throw std::invalid_argument("enumerate_degree_indices: n must be >= 1");
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(multiset_coeff(n, d)));
    MultiIndex scratch(n);
    detail::enumerate_degree(n, d, scratch, 0, out);
    return out;
}

}  // namespace kroa
