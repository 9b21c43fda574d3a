#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "kroa/bounds.hpp"
#include "kroa/power_series.hpp"
#include "kroa/spectral.hpp"
#include "kroa/system.hpp"

namespace kroa {

/// One retained eigenfunction of the Lyapunov sum: the truncated series split
/// into real and imaginary parts, with the multiplicity weight of its group.
struct CandidatePart {
    Complex lambda;
    double weight = 1.0;
    PowerSeries phi;  // P_N phi, complex, cap N
    PowerSeries re;   // real series
    PowerSeries im;
};

/// Vtilde = sum_i weight_i (Re(P_N phi_i)^2 + Im(P_N phi_i)^2), cap 2N.
struct LyapunovCandidate {
    std::uint32_t N = 0;
    PowerSeries V;
    std::vector<CandidatePart> parts;

    LyapunovCandidate() : V(1, 0) {}
};

/// Builds the candidate from one eigenfunction per spectral group (real
/// eigenvalue: weight 1; conjugate pair: weight 2, so the partner is covered
/// without a redundant solve).
inline LyapunovCandidate build_candidate(const std::vector<PowerSeries>& phis,
                                         const SpectralData& sd, std::uint32_t N) {
    if (phis.size() != sd.groups.size())
        throw std::invalid_argument("build_candidate: need exactly one eigenfunction per spectral "
                                    "group (missing eigenvalue coverage)");
    LyapunovCandidate cand;
    cand.N = N;
    const std::size_t n = phis.empty() ? 1 : phis.front().dim();
    PowerSeries V(n, 2 * N);
    for (std::size_t g = 0; g < phis.size(); ++g) {
        if (phis[g].dim() != n) throw std::invalid_argument("build_candidate: dimension mismatch");
        if (std::abs(phis[g].coeff(MultiIndex(n))) != 0.0)
            throw std::invalid_argument("build_candidate: eigenfunction has nonzero constant term");
        CandidatePart part;
        part.lambda = sd.lambdas[sd.groups[g].index];
        part.weight = sd.groups[g].weight;
        part.phi = truncate(phis[g], N);
        part.re = real_part(part.phi);
        part.im = imag_part(part.phi);
        PowerSeries sq = add(mul(part.re, part.re, 2 * N), mul(part.im, part.im, 2 * N));
        V = add(V, scale(sq, part.weight));
        cand.parts.push_back(std::move(part));
    }
    // V(0) = 0 and no linear part: products of series vanishing at 0
    if (std::abs(V.coeff(MultiIndex(n))) != 0.0)
        throw std::logic_error("build_candidate: V(0) != 0");
    cand.V = std::move(V);
    return cand;
}

struct VErrorResult {
    double eps1 = 0.0;
    std::vector<double> B;  // per part: 2 sup |P_N phi| err + err^2
};

/// Propagates per-eigenfunction truncation bounds to |V - Vtilde|:
/// B_i = 2 sup_i err_i + err_i^2, eps1 = sum weight_i B_i.
inline VErrorResult bound_V_error(const std::vector<double>& sup, const std::vector<double>& err,
                                  const std::vector<double>& weight) {
    if (sup.size() != err.size() || sup.size() != weight.size())
        throw std::invalid_argument("bound_V_error: input length mismatch");
    VErrorResult out;
    for (std::size_t i = 0; i < sup.size(); ++i) {
        const double B = 2.0 * sup[i] * err[i] + err[i] * err[i];
        out.B.push_back(B);
        out.eps1 += weight[i] * B;
    }
    return out;
}

/// The exactly computable truncation defects (P_N - I) L P_N phi^{R,I}:
/// polynomials supported on degrees N+1 .. N+deg(F)-1, returned with that cap.
inline std::pair<PowerSeries, PowerSeries> defect_polynomials(const SystemDef& sys,
                                                              const PowerSeries& phi,
                                                              std::uint32_t N) {
    const std::uint32_t dF = sys.field_degree();
    const std::uint32_t cap = N + (dF > 0 ? dF - 1 : 0);
    auto defect = [&](const PowerSeries& part) {
        const PowerSeries full = apply_generator(sys, recap(truncate(part, N), cap), cap);
        return sub(recap(truncate(full, N), cap), full);
    };
    return {defect(real_part(phi)), defect(imag_part(phi))};
}

/// |Vdot - Vtilde_dot| bound:
/// eps2 = 2 sum_i weight_i (|Re lambda_i| B_i + M_i sup|d_R,i| + K_i sup|d_I,i|).
inline double bound_Vdot_error(const std::vector<double>& lambda_re_abs,
                               const std::vector<double>& B, const std::vector<double>& M,
                               const std::vector<double>& K, const std::vector<double>& dR_sup,
                               const std::vector<double>& dI_sup,
                               const std::vector<double>& weight) {
    const std::size_t m = B.size();
    if (lambda_re_abs.size() != m || M.size() != m || K.size() != m || dR_sup.size() != m ||
        dI_sup.size() != m || weight.size() != m)
        throw std::invalid_argument("bound_Vdot_error: input length mismatch");
    double eps2 = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        eps2 += weight[i] * (lambda_re_abs[i] * B[i] + M[i] * dR_sup[i] + K[i] * dI_sup[i]);
    return 2.0 * eps2;
}

/// Inner level: Vtilde > gamma1 forces Vtilde_dot < 0.
/// gamma1 = (eps2 + 2 |lambda_m| eps1) / (2 |lambda_m|) with lambda_m < 0.
inline double gamma1(double eps1, double eps2, double lambda_m) {
    if (!(lambda_m < 0)) throw std::domain_error("gamma1: lambda_m must be < 0");
    if (eps1 < 0 || eps2 < 0) throw std::domain_error("gamma1: eps must be >= 0");
    const double a = std::abs(lambda_m);
    return (eps2 + 2.0 * a * eps1) / (2.0 * a);
}

/// Outer level: the largest sampled level set of Vtilde inside the box of
/// half-width R, taken as the min of Vtilde over the 2n faces on a uniform
/// grid, scaled by `shrink` to stay conservative under sampling.
inline double gamma2(const LyapunovCandidate& cand, double R, std::uint32_t grid_res,
                     double shrink = 0.999) {
    if (grid_res < 2) throw std::invalid_argument("gamma2: grid_res must be >= 2");
    if (!(R > 0)) throw std::invalid_argument("gamma2: R must be > 0");
    const std::size_t n = cand.V.dim();
    const SeriesEvaluator V(cand.V);
    std::vector<double> x(n, 0.0);
    double vmin = std::numeric_limits<double>::infinity();

    if (n == 1) {
        x[0] = -R;
        vmin = std::min(vmin, V.eval_real(x));
        x[0] = R;
        vmin = std::min(vmin, V.eval_real(x));
        return shrink * vmin;
    }

    std::vector<double> ticks(grid_res);
    for (std::uint32_t t = 0; t < grid_res; ++t)
        ticks[t] = -R + 2.0 * R * static_cast<double>(t) / (grid_res - 1);

    const std::size_t free_axes = n - 1;
    std::vector<std::size_t> odo(free_axes);
    for (std::size_t axis = 0; axis < n; ++axis) {
        for (double face : {-R, R}) {
            std::fill(odo.begin(), odo.end(), 0);
            while (true) {
                x[axis] = face;
                std::size_t f = 0;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != axis) x[j] = ticks[odo[f++]];
                vmin = std::min(vmin, V.eval_real(x));
                std::size_t a = free_axes;
                bool done = false;
                while (a > 0) {
                    --a;
                    if (++odo[a] < grid_res) break;
                    odo[a] = 0;
                    if (a == 0) done = true;
                }
                if (done) break;
            }
        }
    }
    return shrink * vmin;
}

enum class CertStatus { Certified, EmptyBand, Failed };

inline const char* to_string(CertStatus s) {
    switch (s) {
        case CertStatus::Certified: return "certified";
        case CertStatus::EmptyBand: return "empty-band";
        default: return "failed";
    }
}

/// Everything needed to audit one retained eigenfunction inside a certificate.
struct PerEigenReport {
    Complex lambda;
    double weight = 1.0;
    TailConstants constants;
    ErrorBound err;
    double sup_R = 0.0;  // l1 bound of P_N phi at R
    double B = 0.0;
    double M_i = 0.0, K_i = 0.0;  // l1 bounds of the real/imag parts at R
    double defect_sup_R = 0.0, defect_sup_I = 0.0;
    std::vector<EigenSolveDiagnostics::BlockWarning> cond_warnings;
};

/// The certified region-of-attraction band
/// Omega = { x in box(R) : gamma1 < Vtilde(x) < gamma2 }.
struct RoaCertificate {
    std::string system_name;
    CertStatus status = CertStatus::Failed;
    std::uint32_t N = 0;
    double S = 0.0, R = 0.0;
    BoundKind kind = BoundKind::Prop2;
    double lambda_m = 0.0;
    double eps1 = 0.0, eps2 = 0.0;
    double gamma1 = 0.0, gamma2 = 0.0;
    std::uint32_t gamma2_grid_res = 0;
    double gamma2_shrink = 0.999;
    std::vector<PerEigenReport> per_eigen;
    RadiusEstimate radius;
    std::uint32_t nonresonant_to = 0;
    double resonance_tol = 0.0;
    double min_gap = 0.0;
    std::vector<std::string> assumptions;
};

/// Assembles eps1/eps2/gamma1/gamma2 and the status from prepared per-part
/// inputs. Failures surface as status, not exceptions.
inline RoaCertificate certify_roa(const SystemDef& sys, const SpectralData& sd,
                                  const LyapunovCandidate& cand,
                                  std::vector<PerEigenReport> per_eigen,
                                  const RadiusEstimate& radius, BoundKind kind,
                                  std::uint32_t gamma2_res, double shrink = 0.999) {
    RoaCertificate cert;
    cert.system_name = sys.name;
    cert.N = cand.N;
    cert.S = radius.S;
    cert.R = radius.R;
    cert.kind = kind;
    cert.lambda_m = sd.lambda_m;
    cert.radius = radius;
    cert.nonresonant_to = sd.nonresonant_to;
    cert.resonance_tol = sd.resonance_tol;
    cert.min_gap = sd.min_gap;
    cert.gamma2_grid_res = gamma2_res;
    cert.gamma2_shrink = shrink;

    std::vector<double> sup, err, weight, lre, B, M, K, dR, dI;
    for (const auto& pe : per_eigen) {
        sup.push_back(pe.sup_R);
        err.push_back(pe.err.value);
        weight.push_back(pe.weight);
        lre.push_back(std::abs(pe.lambda.real()));
        M.push_back(pe.M_i);
        K.push_back(pe.K_i);
        dR.push_back(pe.defect_sup_R);
        dI.push_back(pe.defect_sup_I);
    }
    const VErrorResult ve = bound_V_error(sup, err, weight);
    for (std::size_t i = 0; i < per_eigen.size(); ++i) per_eigen[i].B = ve.B[i];
    cert.eps1 = ve.eps1;
    cert.eps2 = bound_Vdot_error(lre, ve.B, M, K, dR, dI, weight);
    cert.gamma1 = gamma1(cert.eps1, cert.eps2, sd.lambda_m);
    cert.gamma2 = gamma2(cand, radius.R, gamma2_res, shrink);
    cert.per_eigen = std::move(per_eigen);
    cert.status = cert.gamma1 < cert.gamma2 ? CertStatus::Certified : CertStatus::EmptyBand;

    cert.assumptions.push_back("analyticity radius S is a windowed Cauchy-Hadamard estimate "
                               "(coefficient window [" + std::to_string(radius.window_lo) + "," +
                               std::to_string(radius.window_hi) + "]), recorded as an assumption");
    for (std::size_t i = 0; i < cert.per_eigen.size(); ++i) {
        const auto& c = cert.per_eigen[i].constants;
        auto src = [](ConstantSource s) { return s == ConstantSource::Supplied ? "supplied" : "estimated"; };
        std::string which = kind == BoundKind::Prop1 ? std::string("M ") + src(c.source_M)
                            : kind == BoundKind::Prop2 ? std::string("M1 ") + src(c.source_M1)
                                                       : std::string("M2 ") + src(c.source_M2);
        cert.assumptions.push_back("eigenfunction " + std::to_string(i) + ": tail constant " +
                                   which + (which.find("estimated") != std::string::npos
                                                ? " from coefficient window (" +
                                                      std::to_string(c.N) + "," +
                                                      std::to_string(c.window_hi) + "]"
                                                : ""));
        for (const auto& w : cert.per_eigen[i].cond_warnings)
            cert.assumptions.push_back("eigenfunction " + std::to_string(i) + ": degree-" +
                                       std::to_string(w.degree) +
                                       " block solve condition estimate above limit");
    }
    cert.assumptions.push_back("gamma2 sampled on " + std::to_string(gamma2_res) +
                               " points per face axis with shrink factor " + std::to_string(shrink) +
                               " (sampled, not rigorous)");
    return cert;
}

/// Empirical check of the certificate: sample the band, integrate the true
/// dynamics, and confirm every trajectory falls into E_{gamma1}.
struct ValidationReport {
    enum class Status { Ok, BandTooThin };
    Status status = Status::Ok;
    std::size_t requested = 0;
    std::size_t found = 0;
    std::size_t reached = 0;
    double fraction = 0.0;
    double min_neg_vdot_margin = std::numeric_limits<double>::infinity();
    double horizon = 0.0, step = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> samples;
    std::vector<std::uint8_t> reached_flags;
};

inline ValidationReport validate_by_integration(const SystemDef& sys,
                                                const LyapunovCandidate& cand,
                                                const RoaCertificate& cert, std::size_t samples,
                                                double horizon, std::uint64_t seed,
                                                double step = 0.0,
                                                std::size_t check_interval = 8) {
    if (cert.status != CertStatus::Certified)
        throw std::domain_error("validate_by_integration: certificate is not certified");
    const std::size_t n = sys.n;
    const double R = cert.R;
    const double alm = std::abs(cert.lambda_m);
    if (horizon <= 0) horizon = 50.0 / alm;
    if (step <= 0) step = 1e-3 / alm;

    const SeriesEvaluator V(cand.V);
    std::vector<SeriesEvaluator> gradV;
    for (std::size_t i = 0; i < n; ++i) gradV.emplace_back(diff(cand.V, i));
    const FieldEvaluator F(sys);

    ValidationReport rep;
    rep.requested = samples;
    rep.horizon = horizon;
    rep.step = step;
    rep.seed = seed;

    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    // rejection-sample the band
    const std::size_t budget = std::max<std::size_t>(1'000'000, samples * 10'000);
    std::vector<double> x(n);
    for (std::size_t att = 0; att < budget && rep.samples.size() < samples; ++att) {
        for (std::size_t i = 0; i < n; ++i) x[i] = R * (2.0 * unit() - 1.0);
        const double v = V.eval_real(x);
        if (v > cert.gamma1 && v < cert.gamma2) rep.samples.push_back(x);
    }
    rep.found = rep.samples.size();
    if (rep.found < samples) {
        rep.status = ValidationReport::Status::BandTooThin;
        return rep;
    }

    const auto steps = static_cast<std::size_t>(std::ceil(horizon / step));
    std::vector<double> k1(n), k2(n), k3(n), k4(n), xt(n), f(n);
    auto in_box = [&](const std::vector<double>& p) {
        for (double c : p)
            if (std::abs(c) >= R) return false;
        return true;
    };

    for (const auto& start : rep.samples) {
        x = start;
        bool reached = false;
        for (std::size_t s = 0; s <= steps; ++s) {
            if (s % check_interval == 0) {
                const double v = V.eval_real(x);
                if (!std::isfinite(v)) break;
                if (v < cert.gamma1) {
                    reached = true;
                    break;
                }
                if (v < cert.gamma2 && in_box(x)) {  // still inside Omega
                    double vdot = 0.0;
                    F(x, f);
                    for (std::size_t i = 0; i < n; ++i) vdot += gradV[i].eval_real(x) * f[i];
                    rep.min_neg_vdot_margin = std::min(rep.min_neg_vdot_margin, -vdot);
                }
            }
            if (s == steps) break;
            F(x, k1);
            for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * step * k1[i];
            F(xt, k2);
            for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * step * k2[i];
            F(xt, k3);
            for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + step * k3[i];
            F(xt, k4);
            for (std::size_t i = 0; i < n; ++i)
                x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        rep.reached_flags.push_back(reached ? 1 : 0);
        if (reached) ++rep.reached;
    }
    rep.fraction = static_cast<double>(rep.reached) / static_cast<double>(rep.found);
    return rep;
}

}  // namespace kroa
