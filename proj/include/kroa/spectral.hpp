#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "kroa/multi_index.hpp"
#include "kroa/power_series.hpp"
#include "kroa/system.hpp"

namespace kroa {

/// Eigenvalue bookkeeping for a real Jacobian: real eigenvalues stand alone,
/// complex ones are paired with their conjugate and carry weight 2 so that one
/// representative per pair covers the full spectrum.
struct EigenGroup {
    enum class Kind { Real, ConjugatePair };
    Kind kind = Kind::Real;
    std::size_t index = 0;    // representative position in lambdas
    std::size_t partner = 0;  // conjugate position (pairs only)
    double weight = 1.0;
};

struct SpectralData {
    std::vector<Complex> lambdas;    // deterministic order: Re asc, then Im desc
    std::vector<EigenGroup> groups;  // one entry per real eigenvalue / conjugate pair
    double lambda_m = 0.0;           // max_i Re(lambda_i), strictly negative
    std::uint32_t nonresonant_to = 0;
    double resonance_tol = 0.0;
    double min_gap = std::numeric_limits<double>::infinity();
};

/// J_F(0), read off the degree-1 coefficients of F.
inline Eigen::MatrixXd jacobian(const SystemDef& sys) {
    const auto n = static_cast<Eigen::Index>(sys.n);
    Eigen::MatrixXd J(n, n);
    for (std::size_t i = 0; i < sys.n; ++i)
        for (std::size_t j = 0; j < sys.n; ++j) {
            MultiIndex e(sys.n);
            e[j] = 1;
            J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                sys.F[i].coeff(e).real();
        }
    return J;
}

/// Eigenvalues of J_F(0) with hyperbolicity screening and conjugate-pair
/// classification. Refuses non-hyperbolic and unstable equilibria.
inline SpectralData jacobian_spectrum(const SystemDef& sys, double hyperbolic_tol = 1e-9) {
    const Eigen::MatrixXd J = jacobian(sys);
    Eigen::EigenSolver<Eigen::MatrixXd> es(J, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("jacobian_spectrum: eigensolver failed to converge");

    std::vector<Complex> lam(sys.n);
    double scale = 0.0;
    for (std::size_t i = 0; i < sys.n; ++i) {
        lam[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
        scale = std::max(scale, std::abs(lam[i]));
    }
    scale = std::max(scale, 1.0);

    const double tol = hyperbolic_tol * scale;
    for (const auto& l : lam) {
        if (std::abs(l.real()) <= tol)
            throw std::domain_error("jacobian_spectrum: non-hyperbolic equilibrium, Re(lambda) = " +
                                    std::to_string(l.real()) + " within tolerance of 0");
        if (l.real() > 0)
            throw std::domain_error("jacobian_spectrum: unstable equilibrium, eigenvalue " +
                                    std::to_string(l.real()) + (l.imag() >= 0 ? "+" : "") +
                                    std::to_string(l.imag()) + "i has positive real part");
    }

    std::sort(lam.begin(), lam.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() > b.imag();
    });

    SpectralData sd;
    sd.lambdas = lam;
    const double imag_tol = 1e-12 * scale;
    std::vector<bool> used(sys.n, false);
    for (std::size_t i = 0; i < sys.n; ++i) {
        if (used[i]) continue;
        used[i] = true;
        if (std::abs(lam[i].imag()) <= imag_tol) {
            sd.lambdas[i] = Complex{lam[i].real(), 0.0};
            sd.groups.push_back({EigenGroup::Kind::Real, i, i, 1.0});
            continue;
        }
        std::optional<std::size_t> match;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = i + 1; j < sys.n; ++j) {
            if (used[j]) continue;
            const double d = std::abs(lam[j] - std::conj(lam[i]));
            if (d < best) {
                best = d;
                match = j;
            }
        }
        if (!match || best > kRelTol * scale + kAbsTol)
            throw std::runtime_error("jacobian_spectrum: unmatched complex eigenvalue (conjugate "
                                     "pair not found within tolerance)");
        used[*match] = true;
        // symmetrize to an exact conjugate pair
        const Complex avg = 0.5 * (lam[i] + std::conj(lam[*match]));
        sd.lambdas[i] = avg;
        sd.lambdas[*match] = std::conj(avg);
        const std::size_t rep = avg.imag() > 0 ? i : *match;
        const std::size_t other = rep == i ? *match : i;
        sd.groups.push_back({EigenGroup::Kind::ConjugatePair, rep, other, 2.0});
    }
    sd.lambda_m = -std::numeric_limits<double>::infinity();
    for (const auto& l : sd.lambdas) sd.lambda_m = std::max(sd.lambda_m, l.real());
    return sd;
}

struct NonresonanceReport {
    double min_gap = std::numeric_limits<double>::infinity();
    MultiIndex arg_k;
    std::size_t arg_i = 0;
};

/// Verifies min over eigen index i and 2 <= |k| <= N of |<k,lambda> - lambda_i|
/// exceeds tol; throws naming the resonant (k, i) otherwise. Updates the
/// verification record on `sd`.
inline NonresonanceReport check_nonresonance(SpectralData& sd, std::uint32_t N, double tol) {
    if (N < 2) throw std::invalid_argument("check_nonresonance: N must be >= 2");
    const std::size_t n = sd.lambdas.size();
    NonresonanceReport rep;
    for (const auto& k : enumerate_indices(n, N)) {
        if (k.degree() < 2) continue;
        Complex kl{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) kl += static_cast<double>(k[j]) * sd.lambdas[j];
        for (std::size_t i = 0; i < n; ++i) {
            const double gap = std::abs(kl - sd.lambdas[i]);
            if (gap < rep.min_gap) {
                rep.min_gap = gap;
                rep.arg_k = k;
                rep.arg_i = i;
            }
        }
    }
    if (rep.min_gap <= tol)
        throw std::domain_error("check_nonresonance: resonance at k=" + rep.arg_k.to_string() +
                                ", i=" + std::to_string(rep.arg_i) +
                                " (gap " + std::to_string(rep.min_gap) + " <= tol)");
    sd.nonresonant_to = N;
    sd.resonance_tol = tol;
    sd.min_gap = rep.min_gap;
    return rep;
}

/// Matrix of the truncated generator over the graded-lex monomial basis:
/// column i holds the coefficients of P_N(L psi_i).
struct GeneratorMatrix {
    std::uint32_t N = 0;
    std::vector<MultiIndex> basis;  // graded-lex, size l = C(n+N, n)
    // sparse columns: (row, value) with rows ascending
    std::vector<std::vector<std::pair<std::size_t, Complex>>> cols;

    std::size_t dim() const { return basis.size(); }
};

inline GeneratorMatrix build_generator_matrix(const SystemDef& sys, std::uint32_t N,
                                              std::size_t max_dim = 200'000) {
    const std::uint64_t l = binomial_checked(sys.n + static_cast<std::uint64_t>(N), sys.n);
    if (l > max_dim)
        throw std::length_error("build_generator_matrix: basis size l=" + std::to_string(l) +
                                " exceeds the configured budget " + std::to_string(max_dim));
    GeneratorMatrix G;
    G.N = N;
    G.basis = enumerate_indices(sys.n, N);
    std::map<MultiIndex, std::size_t, GradedLexLess> row_of;
    for (std::size_t r = 0; r < G.basis.size(); ++r) row_of.emplace(G.basis[r], r);

    const std::uint32_t dF = sys.field_degree();
    G.cols.resize(G.basis.size());
    for (std::size_t i = 0; i < G.basis.size(); ++i) {
        const PowerSeries psi = PowerSeries::monomial(sys.n, N, G.basis[i], 1.0);
        const PowerSeries col = truncate(apply_generator(sys, recap(psi, N + dF), N + dF), N);
        auto& entries = G.cols[i];
        entries.reserve(col.term_count());
        for (const auto& [k, c] : col.coeffs()) entries.emplace_back(row_of.at(k), c);
    }
    return G;
}

struct PlpReport {
    double max_residual = 0.0;
    double scale = 1.0;
};

/// Max coefficient residual of P_N L P_N p - P_N L p over random polynomials
/// p of degree <= N + deg F. Structurally zero when F(0) = 0; the residual
/// absorbs only floating-point accumulation-order effects.
inline PlpReport check_plp_identity(const SystemDef& sys, std::uint32_t N, std::size_t trials,
                                    std::uint64_t seed = 0x9e3779b97f4a7c15ULL) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const std::uint32_t full = N + sys.field_degree();
    const auto idx = enumerate_indices(sys.n, full);
    PlpReport rep;
    for (std::size_t t = 0; t < trials; ++t) {
        PowerSeries p(sys.n, full);
        for (const auto& k : idx) p.set_coeff(k, Complex{2.0 * unit() - 1.0, 0.0});
        const PowerSeries lhs = apply_generator(sys, truncate(p, N), N);
        const PowerSeries rhs = apply_generator(sys, p, N);
        rep.max_residual = std::max(rep.max_residual, coeff_distance(lhs, rhs));
        rep.scale = std::max({rep.scale, lhs.max_abs_coeff(), rhs.max_abs_coeff()});
    }
    return rep;
}

/// Per-degree triangular solve diagnostics for the eigenfunction recursion.
struct EigenSolveDiagnostics {
    struct BlockWarning {
        std::uint32_t degree;
        double condition_estimate;
    };
    double condition_limit = 1e12;
    std::vector<BlockWarning> warnings;
};

namespace detail {

/// Left eigenvector of J for lambda (i.e. eigenvector of J^T), normalized so
/// the largest-magnitude entry is exactly 1 (real positive, inf-norm 1).
inline Eigen::VectorXcd left_eigenvector(const Eigen::MatrixXd& J, Complex lambda) {
    const Eigen::MatrixXcd JT = J.transpose().cast<Complex>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(JT, /*computeEigenvectors=*/true);
    if (ces.info() != Eigen::Success)
        throw std::runtime_error("left_eigenvector: eigensolver failed to converge");
    Eigen::Index best = 0;
    double bestd = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < JT.rows(); ++j) {
        const double d = std::abs(ces.eigenvalues()(j) - lambda);
        if (d < bestd) {
            second = bestd;
            bestd = d;
            best = j;
        } else {
            second = std::min(second, d);
        }
    }
    double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
    if (bestd > 1e-8 * scale)
        throw std::runtime_error("left_eigenvector: lambda is not an eigenvalue of J within tolerance");
    if (JT.rows() > 1 && second <= 1e-12 * scale)
        throw std::domain_error("left_eigenvector: eigenvalue is not simple (repeated within tolerance)");
    Eigen::VectorXcd w = ces.eigenvectors().col(best);
    Eigen::Index jstar = 0;
    double wmax = -1.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (std::abs(w(j)) > wmax) {
            wmax = std::abs(w(j));
            jstar = j;
        }
    }
    return w / w(jstar);
}

}  // namespace detail

/// Taylor coefficients of the principal eigenfunction phi_{lambda_i} through
/// total degree N_max, by graded block back-substitution: the degree-1 block
/// is the normalized left eigenvector of J_F(0); each degree-m block solves
/// (A_m - lambda I) c_m = -r_m where A_m is the degree-m block of the linear
/// part and r_m collects lower-degree contributions through the nonlinear
/// part of F.
inline PowerSeries principal_eigenfunction(const SystemDef& sys, const SpectralData& sd,
                                           std::size_t eig_index, std::uint32_t N_max,
                                           EigenSolveDiagnostics* diag = nullptr) {
    if (eig_index >= sd.lambdas.size())
        throw std::out_of_range("principal_eigenfunction: eigenvalue index out of range");
    if (N_max < 1) throw std::invalid_argument("principal_eigenfunction: N_max must be >= 1");
    if (sd.nonresonant_to < N_max)
        throw std::domain_error("principal_eigenfunction: non-resonance not verified to degree " +
                                std::to_string(N_max));
    const Complex lambda = sd.lambdas[eig_index];
    const std::size_t n = sys.n;
    const Eigen::MatrixXd J = jacobian(sys);
    const double cond_limit = diag ? diag->condition_limit : 1e12;

    PowerSeries phi(n, N_max);
    // per-degree slices of phi, for the r_m assembly
    std::vector<std::vector<std::pair<MultiIndex, Complex>>> slice(N_max + 1);

    const Eigen::VectorXcd w = detail::left_eigenvector(J, lambda);
    for (std::size_t j = 0; j < n; ++j) {
        const Complex c = w(static_cast<Eigen::Index>(j));
        if (c == Complex{0.0, 0.0}) continue;
        MultiIndex e(n);
        e[j] = 1;
        phi.set_coeff(e, c);
        slice[1].emplace_back(std::move(e), c);
    }

    for (std::uint32_t m = 2; m <= N_max; ++m) {
        const auto basis_m = enumerate_degree_indices(n, m);
        std::map<MultiIndex, std::size_t, GradedLexLess> row_of;
        for (std::size_t r = 0; r < basis_m.size(); ++r) row_of.emplace(basis_m[r], r);
        const auto bm = static_cast<Eigen::Index>(basis_m.size());

        // r_m: degree-m part of L(P_{m-1} phi); only the nonlinear part of F
        // reaches degree m from lower slices.
        Eigen::VectorXcd r = Eigen::VectorXcd::Zero(bm);
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& [kf, cf] : sys.F[i].coeffs()) {
                const std::uint32_t df = kf.degree();
                if (df < 2 || df > m) continue;
                const std::uint32_t d = m + 1 - df;
                if (d < 1 || d >= m) continue;
                for (const auto& [kp, cp] : slice[d]) {
                    const std::uint32_t e = kp[i];
                    if (e == 0) continue;
                    MultiIndex target = kp;
                    target[i] = e - 1;
                    for (std::size_t j = 0; j < n; ++j) target[j] += kf[j];
                    r(static_cast<Eigen::Index>(row_of.at(target))) +=
                        cp * cf * static_cast<double>(e);
                }
            }
        }

        // A_m: action of (Jx).grad on degree-m monomials
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(bm, bm);
        for (std::size_t col = 0; col < basis_m.size(); ++col) {
            const MultiIndex& k = basis_m[col];
            for (std::size_t i = 0; i < n; ++i) {
                const std::uint32_t e = k[i];
                if (e == 0) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    const double Jij = J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    if (Jij == 0.0) continue;
                    MultiIndex target = k;
                    target[i] = e - 1;
                    target[j] += 1;
                    A(static_cast<Eigen::Index>(row_of.at(target)), static_cast<Eigen::Index>(col)) +=
                        Jij * static_cast<double>(e);
                }
            }
        }
        A.diagonal().array() -= lambda;

        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
        const double rcond = lu.rcond();
        if (rcond <= 0 || 1.0 / rcond > cond_limit) {
            if (diag)
                diag->warnings.push_back({m, rcond > 0 ? 1.0 / rcond
                                                       : std::numeric_limits<double>::infinity()});
        }
        const Eigen::VectorXcd c = lu.solve(-r);

        auto& sl = slice[m];
        for (std::size_t row = 0; row < basis_m.size(); ++row) {
            const Complex cc = c(static_cast<Eigen::Index>(row));
            if (cc == Complex{0.0, 0.0}) continue;
            phi.set_coeff(basis_m[row], cc);
            sl.emplace_back(basis_m[row], cc);
        }
    }
    return phi;
}

/// L phi - lambda phi truncated at check_cap. For a degree-N solution the
/// coefficients through degree N vanish (up to rounding); degrees N+1..cap
/// carry the known truncation defect.
inline PowerSeries eigen_residual(const SystemDef& sys, const PowerSeries& phi, Complex lambda,
                                  std::uint32_t check_cap) {
    const PowerSeries lp = apply_generator(sys, phi, check_cap);
    return add(lp, scale(recap(phi, check_cap), -lambda));
}

}  // namespace kroa
