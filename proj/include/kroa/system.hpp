#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kroa/power_series.hpp"

namespace kroa {

/// Polynomial vector field xdot = F(x) with an equilibrium at the origin.
struct SystemDef {
    std::size_t n = 0;
    std::vector<PowerSeries> F;
    std::vector<double> domain_box;  // per-axis half-width of the state box
    std::string name;

    SystemDef(std::vector<PowerSeries> field, std::vector<double> box = {}, std::string id = "")
        : F(std::move(field)), domain_box(std::move(box)), name(std::move(id)) {
        n = F.size();
        if (n == 0) throw std::invalid_argument("SystemDef: empty field");
        for (const auto& f : F) {
            if (f.dim() != n)
                throw std::invalid_argument("SystemDef: component dimension mismatch");
            if (std::abs(f.coeff(MultiIndex(n))) != 0.0)
                throw std::invalid_argument("SystemDef: F(0) != 0 (equilibrium must be at the origin)");
            if (!is_real(f))
                throw std::invalid_argument("SystemDef: field coefficients must be real");
        }
        if (domain_box.empty()) domain_box.assign(n, 1.0);
        if (domain_box.size() != n)
            throw std::invalid_argument("SystemDef: domain_box dimension mismatch");
        for (double b : domain_box)
            if (!(b > 0)) throw std::invalid_argument("SystemDef: domain_box entries must be > 0");
    }

    /// Max total degree across components (>= 1).
    std::uint32_t field_degree() const {
        std::uint32_t d = 1;
        for (const auto& f : F) d = std::max(d, f.degree());
        return d;
    }
};

/// Infinitesimal-generator action L p = F . grad p, truncated at `cap`.
/// Exact for every retained degree.
inline PowerSeries apply_generator(const SystemDef& sys, const PowerSeries& p, std::uint32_t cap) {
    if (p.dim() != sys.n) throw std::invalid_argument("apply_generator: dimension mismatch");
    PowerSeries r(sys.n, cap);
    for (std::size_t i = 0; i < sys.n; ++i) r = add(r, mul(sys.F[i], diff(p, i), cap));
    return r;
}

/// Fast evaluation of F at a point, for integration loops.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const SystemDef& sys) {
        comps_.reserve(sys.n);
        for (const auto& f : sys.F) comps_.emplace_back(f);
    }

    std::size_t dim() const { return comps_.size(); }

    void operator()(std::span<const double> x, std::span<double> out) const {
        for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i].eval_real(x);
    }

private:
    std::vector<SeriesEvaluator> comps_;
};

}  // namespace kroa
