#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kroa/power_series.hpp"

namespace kroa {

/// Cauchy-Hadamard radius scan result and the derived working radii.
struct RadiusEstimate {
    std::vector<double> rho;  // per-axis radius estimate
    double objective = 0.0;   // scan objective at the minimizer
    double S = 0.0;           // working (analyticity) radius, S <= min rho
    double R = 0.0;           // evaluation radius, R < S
    double f_S = 0.0, f_R = 0.0;
    std::uint32_t window_lo = 0, window_hi = 0;
};

/// 1-D radius of convergence estimate: 1 / max over the tail window of
/// |c_k|^{1/k}, zero coefficients skipped. All-zero window means the series
/// looks polynomial/entire: +infinity.
inline double radius_1d(const std::vector<double>& abs_coeffs, std::uint32_t win_lo,
                        std::uint32_t win_hi) {
    if (win_lo < 1 || win_hi < win_lo) throw std::invalid_argument("radius_1d: bad window");
    double root_max = 0.0;
    const std::uint32_t hi = std::min<std::uint32_t>(win_hi,
                                                     abs_coeffs.empty() ? 0 : abs_coeffs.size() - 1);
    for (std::uint32_t k = win_lo; k <= hi; ++k) {
        const double a = abs_coeffs[k];
        if (a <= 0.0) continue;
        root_max = std::max(root_max, std::exp(std::log(a) / k));
    }
    if (root_max == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / root_max;
}

/// |c_k| grouped per total degree, max within each degree (the sequence the
/// radius and tail-constant scans consume).
inline std::vector<double> abs_coeff_by_degree(const PowerSeries& p) {
    std::vector<double> out(p.degree() + 1, 0.0);
    for (const auto& [k, c] : p.coeffs())
        out[k.degree()] = std::max(out[k.degree()], std::abs(c));
    return out;
}

/// Scan objective |1 - max_{1<=|k|<=N, c_k != 0} (|c_k| rho^k)^{1/|k|}|,
/// evaluated in log form.
inline double coeff_objective(const PowerSeries& series, const std::vector<double>& rho,
                              std::uint32_t N) {
    if (rho.size() != series.dim()) throw std::invalid_argument("coeff_objective: rho dimension mismatch");
    for (double r : rho)
        if (!(r > 0)) throw std::invalid_argument("coeff_objective: rho entries must be > 0");
    std::vector<double> lrho(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) lrho[i] = std::log(rho[i]);
    double lmax = -std::numeric_limits<double>::infinity();
    for (const auto& [k, c] : series.coeffs()) {
        const auto d = k.degree();
        if (d < 1) continue;
        if (d > N) break;
        double t = std::log(std::abs(c));
        for (std::size_t i = 0; i < rho.size(); ++i) t += k[i] * lrho[i];
        lmax = std::max(lmax, t / d);
    }
    const double m = std::isfinite(lmax) ? std::exp(lmax) : 0.0;
    return std::abs(1.0 - m);
}

namespace detail {

/// Flattened terms of the scan objective, so a dense radius grid costs one
/// fused loop per point instead of a map walk.
struct ObjectiveTerms {
    std::size_t n;
    std::vector<double> base;    // log|c_k| / |k|
    std::vector<double> weight;  // k_i / |k|, n entries per term

    ObjectiveTerms(const PowerSeries& s, std::uint32_t N) : n(s.dim()) {
        for (const auto& [k, c] : s.coeffs()) {
            const auto d = k.degree();
            if (d < 1) continue;
            if (d > N) break;
            base.push_back(std::log(std::abs(c)) / d);
            for (std::size_t i = 0; i < n; ++i)
                weight.push_back(static_cast<double>(k[i]) / d);
        }
    }

    double objective(const std::vector<double>& lrho) const {
        double lmax = -std::numeric_limits<double>::infinity();
        const double* w = weight.data();
        for (double b : base) {
            double t = b;
            for (std::size_t i = 0; i < n; ++i) t += w[i] * lrho[i];
            lmax = std::max(lmax, t);
            w += n;
        }
        return std::abs(1.0 - (std::isfinite(lmax) ? std::exp(lmax) : 0.0));
    }
};

}  // namespace detail

/// Grid arg-min of coeff_objective. Ties break to the smallest graded-lex
/// grid-index tuple.
inline RadiusEstimate radius_nd(const PowerSeries& series,
                                const std::vector<std::vector<double>>& grid, std::uint32_t N) {
    const std::size_t n = series.dim();
    if (grid.size() != n) throw std::invalid_argument("radius_nd: grid dimension mismatch");
    for (const auto& axis : grid) {
        if (axis.empty()) throw std::invalid_argument("radius_nd: empty grid axis");
        for (double v : axis)
            if (!(v > 0)) throw std::invalid_argument("radius_nd: grid entries must be > 0");
    }
    const detail::ObjectiveTerms terms(series, N);

    std::vector<std::size_t> idx(n, 0);
    std::vector<double> lrho(n);
    for (std::size_t i = 0; i < n; ++i) lrho[i] = std::log(grid[i][0]);

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_idx(n, 0);
    MultiIndex cur(n), bst(n);
    while (true) {
        const double obj = terms.objective(lrho);
        bool better = obj < best;
        if (!better && obj == best) {
            for (std::size_t i = 0; i < n; ++i) {
                cur[i] = static_cast<std::uint32_t>(idx[i]);
                bst[i] = static_cast<std::uint32_t>(best_idx[i]);
            }
            better = graded_lex_less(cur, bst);
        }
        if (better) {
            best = obj;
            best_idx = idx;
        }
        // odometer over the grid, last axis fastest (lex iteration order)
        std::size_t a = n;
        while (a > 0) {
            --a;
            if (++idx[a] < grid[a].size()) {
                lrho[a] = std::log(grid[a][idx[a]]);
                break;
            }
            idx[a] = 0;
            lrho[a] = std::log(grid[a][0]);
            if (a == 0) {
                RadiusEstimate est;
                est.rho.resize(n);
                for (std::size_t i = 0; i < n; ++i) est.rho[i] = grid[i][best_idx[i]];
                est.objective = best;
                return est;
            }
        }
    }
}

/// Working radii from the per-axis estimate: S = f_S * min rho and R = f_R * S
/// unless explicit overrides are given; 0 < R < S <= min rho is enforced.
inline std::pair<double, double> choose_S_R(const std::vector<double>& rho, double f_S, double f_R,
                                            std::optional<double> S_override = std::nullopt,
                                            std::optional<double> R_override = std::nullopt) {
    if (rho.empty()) throw std::invalid_argument("choose_S_R: empty rho");
    double base = std::numeric_limits<double>::infinity();
    for (double r : rho) {
        if (!(r > 0)) throw std::invalid_argument("choose_S_R: rho entries must be > 0");
        base = std::min(base, r);
    }
    if (!S_override && !(f_S > 0 && f_S <= 1))
        throw std::invalid_argument("choose_S_R: f_S must lie in (0, 1]");
    if (!R_override && !(f_R > 0 && (S_override ? true : f_R < f_S)))
        throw std::invalid_argument("choose_S_R: f_R must lie in (0, f_S)");
    const double S = S_override ? *S_override : f_S * base;
    const double R = R_override ? *R_override : f_R * S;
    if (!(0 < R && R < S))
        throw std::domain_error("choose_S_R: need 0 < R < S (got R=" + std::to_string(R) +
                                ", S=" + std::to_string(S) + ")");
    if (std::isfinite(base) && S > base)
        throw std::domain_error("choose_S_R: S=" + std::to_string(S) +
                                " exceeds the radius estimate min rho=" + std::to_string(base));
    return {S, R};
}

}  // namespace kroa
