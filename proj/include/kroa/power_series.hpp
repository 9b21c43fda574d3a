#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "kroa/multi_index.hpp"

namespace kroa {

using Complex = std::complex<double>;

/// Per-coefficient comparison tolerances; identities that hold exactly in
/// exact arithmetic are expected to hold within these after rounding.
inline constexpr double kRelTol = 1e-12;
inline constexpr double kAbsTol = 1e-14;

inline bool coeff_close(Complex a, Complex b, double rel = kRelTol, double abs = kAbsTol) {
    const double d = std::abs(a - b);
    return d <= abs || d <= rel * std::max(std::abs(a), std::abs(b));
}

/// Truncated multivariate power series with complex coefficients.
///
/// Terms of total degree above `cap` are never stored, stored coefficients are
/// never exactly zero, and the coefficient map iterates in graded-lex order.
class PowerSeries {
public:
    using CoeffMap = std::map<MultiIndex, Complex, GradedLexLess>;

    PowerSeries(std::size_t n, std::uint32_t cap) : n_(n), cap_(cap) {
        if (n < 1) throw std::invalid_argument("PowerSeries: dimension must be >= 1");
    }

    static PowerSeries constant(std::size_t n, std::uint32_t cap, Complex c) {
        PowerSeries p(n, cap);
        p.set_coeff(MultiIndex(n), c);
        return p;
    }

    /// The coordinate function x_axis (0-based axis).
    static PowerSeries variable(std::size_t n, std::uint32_t cap, std::size_t axis) {
        if (axis >= n) throw std::out_of_range("PowerSeries::variable: axis out of range");
        MultiIndex k(n);
        k[axis] = 1;
        return monomial(n, cap, k, 1.0);
    }

    static PowerSeries monomial(std::size_t n, std::uint32_t cap, MultiIndex k, Complex c) {
        if (k.dim() != n) throw std::invalid_argument("PowerSeries::monomial: index dimension mismatch");
        PowerSeries p(n, cap);
        p.set_coeff(std::move(k), c);
        return p;
    }

    std::size_t dim() const { return n_; }
    std::uint32_t cap() const { return cap_; }
    const CoeffMap& coeffs() const { return c_; }
    std::size_t term_count() const { return c_.size(); }
    bool is_zero() const { return c_.empty(); }

    Complex coeff(const MultiIndex& k) const {
        auto it = c_.find(k);
        return it == c_.end() ? Complex{0.0, 0.0} : it->second;
    }

    /// Stores c at k; terms beyond the cap are discarded (truncation
    /// semantics) and exact zeros are not stored.
    void set_coeff(MultiIndex k, Complex c) {
        if (k.dim() != n_) throw std::invalid_argument("PowerSeries::set_coeff: index dimension mismatch");
        if (k.degree() > cap_) return;
        if (c == Complex{0.0, 0.0}) {
            c_.erase(k);
            return;
        }
        c_[std::move(k)] = c;
    }

    void add_coeff(const MultiIndex& k, Complex c) {
        if (k.dim() != n_) throw std::invalid_argument("PowerSeries::add_coeff: index dimension mismatch");
        if (k.degree() > cap_) return;
        auto [it, inserted] = c_.try_emplace(k, c);
        if (!inserted) {
            it->second += c;
            if (it->second == Complex{0.0, 0.0}) c_.erase(it);
        } else if (c == Complex{0.0, 0.0}) {
            c_.erase(it);
        }
    }

    /// Largest stored total degree (0 for the zero series).
    std::uint32_t degree() const {
        return c_.empty() ? 0 : c_.rbegin()->first.degree();
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [k, c] : c_) m = std::max(m, std::abs(c));
        return m;
    }

private:
    std::size_t n_;
    std::uint32_t cap_;
    CoeffMap c_;
};

inline PowerSeries add(const PowerSeries& p, const PowerSeries& q) {
    if (p.dim() != q.dim()) throw std::invalid_argument("add: dimension mismatch");
    PowerSeries r(p.dim(), std::max(p.cap(), q.cap()));
    for (const auto& [k, c] : p.coeffs()) r.add_coeff(k, c);
    for (const auto& [k, c] : q.coeffs()) r.add_coeff(k, c);
    return r;
}

inline PowerSeries scale(const PowerSeries& p, Complex a) {
    PowerSeries r(p.dim(), p.cap());
    if (a == Complex{0.0, 0.0}) return r;
    for (const auto& [k, c] : p.coeffs()) r.set_coeff(k, a * c);
    return r;
}

inline PowerSeries sub(const PowerSeries& p, const PowerSeries& q) {
    return add(p, scale(q, -1.0));
}

/// Truncated Cauchy product: every term of degree <= cap is exact, higher
/// degrees are discarded.
inline PowerSeries mul(const PowerSeries& p, const PowerSeries& q, std::uint32_t cap) {
    if (p.dim() != q.dim()) throw std::invalid_argument("mul: dimension mismatch");
    PowerSeries r(p.dim(), cap);
    const std::size_t n = p.dim();
    MultiIndex sum(n);
    for (const auto& [kp, cp] : p.coeffs()) {
        const auto dp = kp.degree();
        if (dp > cap) break;  // graded order: all following terms too high
        for (const auto& [kq, cq] : q.coeffs()) {
            if (dp + kq.degree() > cap) break;
            for (std::size_t i = 0; i < n; ++i) sum[i] = kp[i] + kq[i];
            r.add_coeff(sum, cp * cq);
        }
    }
    return r;
}

/// P_N: removes all terms of degree > N. The result cap is min(p.cap, N) so a
/// truncation never claims precision the input did not have.
inline PowerSeries truncate(const PowerSeries& p, std::uint32_t N) {
    PowerSeries r(p.dim(), std::min(p.cap(), N));
    for (const auto& [k, c] : p.coeffs()) {
        if (k.degree() > N) break;
        r.set_coeff(k, c);
    }
    return r;
}

/// Re-declares the cap of a polynomial whose higher-degree terms are known to
/// be identically zero (e.g. a truncation treated as an exact polynomial).
inline PowerSeries recap(const PowerSeries& p, std::uint32_t cap) {
    PowerSeries r(p.dim(), cap);
    for (const auto& [k, c] : p.coeffs()) {
        if (k.degree() > cap) break;
        r.set_coeff(k, c);
    }
    return r;
}

/// Formal partial derivative along `axis` (0-based); the cap drops by one.
inline PowerSeries diff(const PowerSeries& p, std::size_t axis) {
    if (axis >= p.dim()) throw std::out_of_range("diff: axis out of range");
    PowerSeries r(p.dim(), p.cap() == 0 ? 0 : p.cap() - 1);
    for (const auto& [k, c] : p.coeffs()) {
        const auto e = k[axis];
        if (e == 0) continue;
        MultiIndex kk = k;
        kk[axis] = e - 1;
        r.set_coeff(std::move(kk), c * static_cast<double>(e));
    }
    return r;
}

inline Complex eval(const PowerSeries& p, std::span<const Complex> x) {
    if (x.size() != p.dim()) throw std::invalid_argument("eval: point dimension mismatch");
    const std::size_t n = p.dim();
    // power tables per axis, up to the max stored exponent
    std::vector<std::uint32_t> maxe(n, 0);
    for (const auto& [k, c] : p.coeffs())
        for (std::size_t i = 0; i < n; ++i) maxe[i] = std::max(maxe[i], k[i]);
    std::vector<std::vector<Complex>> pw(n);
    for (std::size_t i = 0; i < n; ++i) {
        pw[i].resize(maxe[i] + 1);
        pw[i][0] = 1.0;
        for (std::uint32_t e = 1; e <= maxe[i]; ++e) pw[i][e] = pw[i][e - 1] * x[i];
    }
    Complex s{0.0, 0.0};  // graded-lex summation order, for reproducibility
    for (const auto& [k, c] : p.coeffs()) {
        Complex t = c;
        for (std::size_t i = 0; i < n; ++i) t *= pw[i][k[i]];
        s += t;
    }
    return s;
}

inline Complex eval(const PowerSeries& p, std::span<const double> x) {
    std::vector<Complex> z(x.begin(), x.end());
    return eval(p, std::span<const Complex>(z));
}

inline Complex eval(const PowerSeries& p, std::initializer_list<double> x) {
    std::vector<Complex> z(x.begin(), x.end());
    return eval(p, std::span<const Complex>(z));
}

/// Coefficient-based sup bound: sup over the closed box |x_i| <= R of |p(x)|
/// is at most sum_k |c_k| R^{|k|}.
inline double l1_bound(const PowerSeries& p, double R) {
    if (R < 0) throw std::invalid_argument("l1_bound: R must be >= 0");
    std::vector<double> rpow(p.degree() + 1);
    rpow[0] = 1.0;
    for (std::size_t d = 1; d < rpow.size(); ++d) rpow[d] = rpow[d - 1] * R;
    double s = 0.0;
    for (const auto& [k, c] : p.coeffs()) s += std::abs(c) * rpow[k.degree()];
    return s;
}

/// p composed with the linear map x -> A x (A row-major n x n), truncated.
inline PowerSeries linear_substitute(const PowerSeries& p,
                                     const std::vector<std::vector<Complex>>& A,
                                     std::uint32_t cap) {
    const std::size_t n = p.dim();
    if (A.size() != n) throw std::invalid_argument("linear_substitute: matrix dimension mismatch");
    for (const auto& row : A)
        if (row.size() != n) throw std::invalid_argument("linear_substitute: matrix dimension mismatch");

    // linear forms L_i = sum_j A_ij x_j and their powers, memoized per axis
    std::vector<std::vector<PowerSeries>> pw(n);
    for (std::size_t i = 0; i < n; ++i) {
        PowerSeries li(n, cap);
        for (std::size_t j = 0; j < n; ++j) {
            MultiIndex k(n);
            k[j] = 1;
            li.add_coeff(k, A[i][j]);
        }
        pw[i].push_back(PowerSeries::constant(n, cap, 1.0));
        pw[i].push_back(std::move(li));
    }
    auto power = [&](std::size_t i, std::uint32_t e) -> const PowerSeries& {
        while (pw[i].size() <= e) pw[i].push_back(mul(pw[i].back(), pw[i][1], cap));
        return pw[i][e];
    };

    PowerSeries r(n, cap);
    for (const auto& [k, c] : p.coeffs()) {
        if (k.degree() > cap) break;
        PowerSeries term = PowerSeries::constant(n, cap, c);
        for (std::size_t i = 0; i < n; ++i)
            if (k[i] > 0) term = mul(term, power(i, k[i]), cap);
        r = add(r, term);
    }
    return r;
}

inline PowerSeries real_part(const PowerSeries& p) {
    PowerSeries r(p.dim(), p.cap());
    for (const auto& [k, c] : p.coeffs()) r.set_coeff(k, Complex{c.real(), 0.0});
    return r;
}

inline PowerSeries imag_part(const PowerSeries& p) {
    PowerSeries r(p.dim(), p.cap());
    for (const auto& [k, c] : p.coeffs()) r.set_coeff(k, Complex{c.imag(), 0.0});
    return r;
}

inline PowerSeries conj_series(const PowerSeries& p) {
    PowerSeries r(p.dim(), p.cap());
    for (const auto& [k, c] : p.coeffs()) r.set_coeff(k, std::conj(c));
    return r;
}

inline bool is_real(const PowerSeries& p, double tol = kAbsTol) {
    for (const auto& [k, c] : p.coeffs())
        if (std::abs(c.imag()) > tol * std::max(1.0, std::abs(c))) return false;
    return true;
}

/// Equality within per-coefficient tolerances; caps must agree.
inline bool approx_equal(const PowerSeries& p, const PowerSeries& q, double rel = kRelTol,
                         double abs = kAbsTol) {
    if (p.dim() != q.dim() || p.cap() != q.cap()) return false;
    for (const auto& [k, c] : p.coeffs())
        if (!coeff_close(c, q.coeff(k), rel, abs)) return false;
    for (const auto& [k, c] : q.coeffs())
        if (!coeff_close(p.coeff(k), c, rel, abs)) return false;
    return true;
}

/// Max |coefficient| difference over the union of supports.
inline double coeff_distance(const PowerSeries& p, const PowerSeries& q) {
    double m = 0.0;
    for (const auto& [k, c] : p.coeffs()) m = std::max(m, std::abs(c - q.coeff(k)));
    for (const auto& [k, c] : q.coeffs()) m = std::max(m, std::abs(p.coeff(k) - c));
    return m;
}

/// Flattened read-only view of a series for tight evaluation loops
/// (trajectory integration, boundary grids, lattice exports).
class SeriesEvaluator {
public:
    explicit SeriesEvaluator(const PowerSeries& p) : n_(p.dim()) {
        maxe_.assign(n_, 0);
        exps_.reserve(p.term_count() * n_);
        coeffs_.reserve(p.term_count());
        for (const auto& [k, c] : p.coeffs()) {  // graded-lex order preserved
            for (std::size_t i = 0; i < n_; ++i) {
                exps_.push_back(k[i]);
                maxe_[i] = std::max(maxe_[i], k[i]);
            }
            coeffs_.push_back(c);
        }
        pw_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) pw_[i].resize(maxe_[i] + 1, 1.0);
    }

    std::size_t dim() const { return n_; }

    Complex operator()(std::span<const double> x) const {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::uint32_t e = 1; e <= maxe_[i]; ++e) pw_[i][e] = pw_[i][e - 1] * x[i];
        Complex s{0.0, 0.0};
        const std::uint32_t* ek = exps_.data();
        for (const Complex& c : coeffs_) {
            double t = 1.0;
            for (std::size_t i = 0; i < n_; ++i) t *= pw_[i][ek[i]];
            s += c * t;
            ek += n_;
        }
        return s;
    }

    double eval_real(std::span<const double> x) const { return (*this)(x).real(); }

private:
    std::size_t n_;
    std::vector<std::uint32_t> maxe_;
    std::vector<std::uint32_t> exps_;
    std::vector<Complex> coeffs_;
    mutable std::vector<std::vector<double>> pw_;
};

}  // namespace kroa
