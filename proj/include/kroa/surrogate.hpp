#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kroa/lyapunov.hpp"
#include "kroa/power_series.hpp"
#include "kroa/spectral.hpp"
#include "kroa/system.hpp"

namespace kroa {

/// The vector field for which the truncated eigenfunctions are exact:
/// J_phi(x) Ftilde(x) = [lambda_i P_N phi_i(x)]_i. Conjugate pairs contribute
/// the equivalent real row pair (Re phi, Im phi) with right-hand sides
/// Re(lambda phi), Im(lambda phi), so the solve stays real.
class SurrogateField {
public:
    SurrogateField(const SpectralData& sd, const std::vector<PowerSeries>& phis, std::uint32_t N) {
        if (phis.size() != sd.groups.size())
            throw std::invalid_argument("SurrogateField: need one eigenfunction per spectral group");
        n_ = phis.empty() ? 0 : phis.front().dim();
        for (std::size_t g = 0; g < phis.size(); ++g) {
            const auto& grp = sd.groups[g];
            const Complex lambda = sd.lambdas[grp.index];
            const PowerSeries phiN = truncate(phis[g], N);
            const PowerSeries re = real_part(phiN);
            const PowerSeries im = imag_part(phiN);
            if (grp.kind == EigenGroup::Kind::Real) {
                rows_.push_back(re);
                rhs_.push_back(scale(re, lambda.real()));
            } else {
                // grad(Re phi) . F = Re(lambda phi), grad(Im phi) . F = Im(lambda phi)
                rows_.push_back(re);
                rhs_.push_back(sub(scale(re, lambda.real()), scale(im, lambda.imag())));
                rows_.push_back(im);
                rhs_.push_back(add(scale(im, lambda.real()), scale(re, lambda.imag())));
            }
        }
        if (rows_.size() != n_)
            throw std::invalid_argument("SurrogateField: spectral groups do not cover the dimension");
        for (const auto& r : rows_) {
            std::vector<SeriesEvaluator> g;
            for (std::size_t j = 0; j < n_; ++j) g.emplace_back(diff(r, j));
            grad_.push_back(std::move(g));
        }
        for (const auto& r : rhs_) rhs_eval_.emplace_back(r);

        // invertibility reference scale at the origin
        const Eigen::MatrixXd J0 = jacobian_at(std::vector<double>(n_, 0.0));
        det_scale0_ = std::abs(J0.determinant());
        det_tol_ = 1e-10 * std::max(det_scale0_, std::numeric_limits<double>::min());
        if (det_scale0_ <= 0.0)
            throw std::domain_error("SurrogateField: J_phi(0) is singular");
    }

    std::size_t dim() const { return n_; }
    double det_tol() const { return det_tol_; }
    double det_scale0() const { return det_scale0_; }

    Eigen::MatrixXd jacobian_at(std::span<const double> x) const {
        Eigen::MatrixXd J(n_, n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    grad_[i][j].eval_real(x);
        return J;
    }

    /// Ftilde(x) by dense LU with partial pivoting; refuses near-singular
    /// J_phi(x).
    std::vector<double> operator()(std::span<const double> x) const {
        const Eigen::MatrixXd J = jacobian_at(x);
        Eigen::VectorXd b(n_);
        for (std::size_t i = 0; i < n_; ++i)
            b(static_cast<Eigen::Index>(i)) = rhs_eval_[i].eval_real(x);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
        const double det = std::abs(lu.determinant());
        if (det <= det_tol_) {
            std::string pt = "(";
            for (std::size_t i = 0; i < n_; ++i)
                pt += (i ? "," : "") + std::to_string(x[i]);
            throw std::domain_error("SurrogateField: |det J_phi| = " + std::to_string(det) +
                                    " below tolerance at x=" + pt + ")");
        }
        const Eigen::VectorXd f = lu.solve(b);
        return std::vector<double>(f.data(), f.data() + n_);
    }

    const std::vector<PowerSeries>& rows() const { return rows_; }
    const std::vector<PowerSeries>& rhs() const { return rhs_; }

private:
    std::size_t n_ = 0;
    std::vector<PowerSeries> rows_;
    std::vector<PowerSeries> rhs_;
    std::vector<std::vector<SeriesEvaluator>> grad_;
    std::vector<SeriesEvaluator> rhs_eval_;
    double det_tol_ = 0.0;
    double det_scale0_ = 0.0;
};

struct SurrogateDefects {
    std::vector<double> eps;  // per component: max grid |F_i - Ftilde_i| * safety
    double min_abs_det = std::numeric_limits<double>::infinity();
    std::uint32_t grid_res = 0;
    double safety = 1.05;
};

/// Sampled sup of |F - Ftilde| over a uniform grid on the box of half-width R.
/// Grid-sampled, not rigorous; flagged as such wherever consumed.
inline SurrogateDefects surrogate_defect_bounds(const SystemDef& sys, const SurrogateField& sf,
                                                double R, std::uint32_t grid_res,
                                                double safety = 1.05) {
    if (grid_res < 2) throw std::invalid_argument("surrogate_defect_bounds: grid_res must be >= 2");
    const std::size_t n = sys.n;
    SurrogateDefects out;
    out.grid_res = grid_res;
    out.safety = safety;
    out.eps.assign(n, 0.0);
    const FieldEvaluator F(sys);

    std::vector<double> ticks(grid_res);
    for (std::uint32_t t = 0; t < grid_res; ++t)
        ticks[t] = -R + 2.0 * R * static_cast<double>(t) / (grid_res - 1);

    std::vector<std::size_t> odo(n, 0);
    std::vector<double> x(n), f(n);
    while (true) {
        for (std::size_t i = 0; i < n; ++i) x[i] = ticks[odo[i]];
        out.min_abs_det = std::min(out.min_abs_det, std::abs(sf.jacobian_at(x).determinant()));
        const std::vector<double> ft = sf(x);  // throws on a singular grid point
        F(x, f);
        for (std::size_t i = 0; i < n; ++i)
            out.eps[i] = std::max(out.eps[i], std::abs(f[i] - ft[i]));
        std::size_t a = n;
        bool done = false;
        while (a > 0) {
            --a;
            if (++odo[a] < grid_res) break;
            odo[a] = 0;
            if (a == 0) done = true;
        }
        if (done) break;
    }
    for (double& e : out.eps) e *= safety;
    return out;
}

/// Rigorous per-axis bounds max_{box(R)} |dVtilde/dx_i| <= l1(diff(V, i), R).
inline std::vector<double> grad_V_bounds(const LyapunovCandidate& cand, double R) {
    std::vector<double> delta;
    for (std::size_t i = 0; i < cand.V.dim(); ++i) delta.push_back(l1_bound(diff(cand.V, i), R));
    return delta;
}

/// Surrogate-path inner level: sum_i eps_i delta_i / (2 |lambda_m|).
inline double surrogate_gamma1(const std::vector<double>& eps, const std::vector<double>& delta,
                               double lambda_m) {
    if (!(lambda_m < 0)) throw std::domain_error("surrogate_gamma1: lambda_m must be < 0");
    if (eps.size() != delta.size())
        throw std::invalid_argument("surrogate_gamma1: input length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) s += eps[i] * delta[i];
    return s / (2.0 * std::abs(lambda_m));
}

/// Checks that every eigenvalue of J_F(0) appears in the spectrum of
/// J_Ftilde(0), the latter formed by central finite differences of the
/// surrogate at the origin. Returns the max matching distance.
inline double check_surrogate_spectrum(const SurrogateField& sf, const SpectralData& sd,
                                       double R = 1.0) {
    const std::size_t n = sf.dim();
    const double h = 1e-6 * std::max(1.0, R);
    Eigen::MatrixXd Jt(n, n);
    std::vector<double> xp(n, 0.0), xm(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        xp.assign(n, 0.0);
        xm.assign(n, 0.0);
        xp[j] = h;
        xm[j] = -h;
        const auto fp = sf(xp);
        const auto fm = sf(xm);
        for (std::size_t i = 0; i < n; ++i)
            Jt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (fp[i] - fm[i]) / (2.0 * h);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(Jt, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("check_surrogate_spectrum: eigensolver failed");
    double worst = 0.0;
    for (const auto& lambda : sd.lambdas) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j)
            best = std::min(best, std::abs(lambda - es.eigenvalues()(j)));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace kroa
