#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kroa/analyticity.hpp"
#include "kroa/power_series.hpp"

namespace kroa {

enum class BoundKind { Prop1, Prop2, Prop3 };

inline const char* to_string(BoundKind k) {
    switch (k) {
        case BoundKind::Prop1: return "prop1";
        case BoundKind::Prop2: return "prop2";
        default: return "prop3";
    }
}

/// A truncation-error bound sup_{|x_i|<R} |phi - P_N phi| together with the
/// inputs it was evaluated from.
struct ErrorBound {
    double value = 0.0;
    BoundKind kind = BoundKind::Prop1;
    double constant = 0.0;  // M, M1 or M2
    double S = 0.0, R = 0.0;
    std::uint32_t N = 0;
    std::size_t n = 1;
};

namespace detail {

inline void require_radii(double S, double R, const char* who) {
    if (!(S > 0) || !(R > 0) || R >= S)
        throw std::domain_error(std::string(who) + ": need 0 < R < S (got R=" + std::to_string(R) +
                                ", S=" + std::to_string(S) + ")");
}

/// Exact tail sum_{k>N} ((n choose k)) q^k, evaluated term by term with
/// compensated summation (the bracket form cancels catastrophically at
/// large N).
inline double multiset_tail(std::size_t n, std::uint32_t N, double q, const char* who) {
    if (n < 1) throw std::invalid_argument(std::string(who) + ": n must be >= 1");
    if (!(q >= 0) || q >= 1)
        throw std::domain_error(std::string(who) + ": tail ratio must lie in [0, 1)");
    if (q == 0.0) return 0.0;
    // first term: ((n choose N+1)) q^{N+1}, multiset coeff as a product
    double t = std::pow(q, static_cast<double>(N) + 1.0);
    for (std::size_t j = 1; j + 1 <= n; ++j)
        t *= (static_cast<double>(N) + 1.0 + j) / static_cast<double>(j);
    double sum = 0.0, comp = 0.0;
    std::uint64_t k = N + 1;
    while (t > 0.0) {
        const double y = t - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if (t <= sum * 1e-18 && k > static_cast<std::uint64_t>(N) + 8) break;
        // ratio ((n,k+1))/((n,k)) * q = (n+k)/(k+1) * q
        t *= q * (static_cast<double>(n) + static_cast<double>(k)) / (static_cast<double>(k) + 1.0);
        ++k;
        if (k > static_cast<std::uint64_t>(N) + 100'000'000)
            throw std::runtime_error(std::string(who) + ": tail summation failed to converge");
    }
    if (sum < 0)
        throw std::runtime_error(std::string(who) + ": internal consistency: negative tail");
    return sum;
}

}  // namespace detail

/// sup-norm bound M over the closed box of radius S:
/// |phi - P_N phi| <= M (R/S)^{N+1} / (1 - R/S) on the box of radius R.
inline ErrorBound bound_prop1(double M, double S, double R, std::uint32_t N, std::size_t n) {
    detail::require_radii(S, R, "bound_prop1");
    if (!(M > 0)) throw std::domain_error("bound_prop1: M must be > 0");
    const double q = R / S;
    const double value = M * std::pow(q, static_cast<double>(N) + 1.0) / (1.0 - q);
    return {value, BoundKind::Prop1, M, S, R, N, n};
}

/// Coefficient bound M1 >= max_{|k|>N} |c_k| S^{|k|}:
/// |phi - P_N phi| <= M1 * sum_{k>N} ((n choose k)) (R/S)^k.
inline ErrorBound bound_prop2(double M1, double S, double R, std::uint32_t N, std::size_t n) {
    detail::require_radii(S, R, "bound_prop2");
    if (!(M1 > 0)) throw std::domain_error("bound_prop2: M1 must be > 0");
    const double value = M1 * detail::multiset_tail(n, N, R / S, "bound_prop2");
    return {value, BoundKind::Prop2, M1, S, R, N, n};
}

/// Squared-coefficient bound M2 >= sum_{|k|>N} |c_k|^2 S^{2|k|}; via
/// Cauchy-Schwarz |phi - P_N phi| <= sqrt(M2 * sum_{k>N} ((n choose k)) (R/S)^{2k}).
inline ErrorBound bound_prop3(double M2, double S, double R, std::uint32_t N, std::size_t n) {
    detail::require_radii(S, R, "bound_prop3");
    if (!(M2 > 0)) throw std::domain_error("bound_prop3: M2 must be > 0");
    const double q = R / S;
    const double radicand = detail::multiset_tail(n, N, q * q, "bound_prop3");
    return {std::sqrt(M2 * radicand), BoundKind::Prop3, M2, S, R, N, n};
}

inline ErrorBound eval_bound(BoundKind kind, double constant, double S, double R, std::uint32_t N,
                             std::size_t n) {
    switch (kind) {
        case BoundKind::Prop1: return bound_prop1(constant, S, R, N, n);
        case BoundKind::Prop2: return bound_prop2(constant, S, R, N, n);
        default: return bound_prop3(constant, S, R, N, n);
    }
}

enum class ConstantSource { Estimated, Supplied };

/// The tail constants feeding the three bounds, with their provenance.
struct TailConstants {
    double M = 0.0, M1 = 0.0, M2 = 0.0;
    std::uint32_t N = 0;
    std::uint32_t window_lo = 0, window_hi = 0;
    ConstantSource source_M = ConstantSource::Estimated;
    ConstantSource source_M1 = ConstantSource::Estimated;
    ConstantSource source_M2 = ConstantSource::Estimated;
    bool m1_monotone = true;  // observed decrease of |c_k| S^k over the window
};

/// Empirical sup bound for |phi| over the closed box of radius S: the max over
/// the window of the coefficient-l1 bound of the partial sums P_k phi. The l1
/// bound already over-bounds the sup sequence, so the default safety is 1.
inline double estimate_M(const PowerSeries& series, double S, std::uint32_t win_lo,
                         std::uint32_t win_hi, double safety = 1.0) {
    if (win_hi > series.cap())
        throw std::invalid_argument("estimate_M: window exceeds series cap");
    if (win_hi < win_lo) throw std::invalid_argument("estimate_M: empty window");
    std::vector<double> per_degree(win_hi + 1, 0.0);
    std::vector<double> spow(win_hi + 1, 1.0);
    for (std::uint32_t d = 1; d <= win_hi; ++d) spow[d] = spow[d - 1] * S;
    for (const auto& [k, c] : series.coeffs()) {
        const auto d = k.degree();
        if (d > win_hi) break;
        per_degree[d] += std::abs(c) * spow[d];
    }
    double prefix = 0.0, best = 0.0;
    for (std::uint32_t d = 0; d <= win_hi; ++d) {
        prefix += per_degree[d];
        if (d >= win_lo) best = std::max(best, prefix);
    }
    return safety * best;
}

/// Empirical tail-coefficient bound max_{|k| in window} |c_k| S^{|k|}
/// (per-degree max for n > 1). Also reports whether the per-degree sequence
/// of nonzero maxima was observed to decrease over the window.
inline double estimate_M1(const PowerSeries& series, double S, std::uint32_t N,
                          std::uint32_t win_lo, std::uint32_t win_hi, double safety = 1.0,
                          bool* monotone_out = nullptr) {
    if (win_lo <= N) throw std::invalid_argument("estimate_M1: window must start above N");
    if (win_hi < win_lo) throw std::invalid_argument("estimate_M1: empty window");
    if (win_hi > series.cap()) throw std::invalid_argument("estimate_M1: window exceeds series cap");
    std::vector<double> md = abs_coeff_by_degree(series);
    md.resize(win_hi + 1, 0.0);
    double best = 0.0, spow = std::pow(S, static_cast<double>(win_lo));
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::uint32_t d = win_lo; d <= win_hi; ++d, spow *= S) {
        const double v = md[d] * spow;
        if (v > 0.0) {
            if (v > prev) monotone = false;
            prev = v;
            best = std::max(best, v);
        }
    }
    if (monotone_out) *monotone_out = monotone;
    return safety * best;
}

/// Empirical bound for sum_{|k|>N} |c_k|^2 S^{2|k|}: the windowed sum plus a
/// geometric extrapolation of the per-degree sums beyond the window, with the
/// ratio fitted on the last decade of the window. Heuristic; flagged as
/// estimated wherever it is consumed.
inline double estimate_M2(const PowerSeries& series, double S, std::uint32_t N,
                          std::uint32_t win_lo, std::uint32_t win_hi) {
    if (win_lo <= N) throw std::invalid_argument("estimate_M2: window must start above N");
    if (win_hi < win_lo) throw std::invalid_argument("estimate_M2: empty window");
    if (win_hi > series.cap()) throw std::invalid_argument("estimate_M2: window exceeds series cap");
    std::vector<double> t(win_hi + 1, 0.0);  // per-degree sums |c_k|^2 S^{2|k|}
    std::vector<double> s2pow(win_hi + 1, 1.0);
    const double S2 = S * S;
    for (std::uint32_t d = 1; d <= win_hi; ++d) s2pow[d] = s2pow[d - 1] * S2;
    for (const auto& [k, c] : series.coeffs()) {
        const auto d = k.degree();
        if (d < win_lo) continue;
        if (d > win_hi) break;
        t[d] += std::abs(c) * std::abs(c) * s2pow[d];
    }
    double sum = 0.0;
    for (std::uint32_t d = win_lo; d <= win_hi; ++d) sum += t[d];
    if (sum == 0.0) return 0.0;  // all-zero tail: polynomial eigenfunction

    // geometric extrapolation beyond the window
    std::vector<std::pair<std::uint32_t, double>> nz;
    for (std::uint32_t d = win_lo; d <= win_hi; ++d)
        if (t[d] > 0.0) nz.emplace_back(d, t[d]);
    const std::uint32_t span = win_hi - win_lo;
    const std::uint32_t decade_lo = win_hi - std::max<std::uint32_t>(1, span / 10);
    std::size_t first = 0;
    while (first + 1 < nz.size() && nz[first].first < decade_lo) ++first;
    const auto [d0, t0] = nz[first];
    const auto [d1, t1] = nz.back();
    if (d1 == d0) return sum;  // single nonzero degree: nothing to extrapolate
    const double r = std::pow(t1 / t0, 1.0 / static_cast<double>(d1 - d0));
    if (!(r < 1.0))
        throw std::domain_error("estimate_M2: tail ratio " + std::to_string(r) +
                                " >= 1, no finite extrapolation");
    return sum + t1 * r / (1.0 - r);
}

}  // namespace kroa
