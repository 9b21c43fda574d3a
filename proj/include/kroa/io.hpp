#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kroa/lyapunov.hpp"
#include "kroa/power_series.hpp"
#include "kroa/spectral.hpp"

namespace kroa {

using Json = nlohmann::ordered_json;

/// Series wire format: array of {"k": [ints], "re": float, "im": float},
/// graded-lex sorted (the map order).
inline Json series_to_json(const PowerSeries& p) {
    Json arr = Json::array();
    for (const auto& [k, c] : p.coeffs()) {
        Json rec;
        rec["k"] = k.k;
        rec["re"] = c.real();
        rec["im"] = c.imag();
        arr.push_back(std::move(rec));
    }
    return arr;
}

inline PowerSeries series_from_json(const Json& arr, std::size_t n, std::uint32_t cap) {
    PowerSeries p(n, cap);
    for (const auto& rec : arr) {
        MultiIndex k;
        k.k = rec.at("k").get<std::vector<std::uint32_t>>();
        if (k.dim() != n) throw std::invalid_argument("series_from_json: index dimension mismatch");
        p.set_coeff(std::move(k),
                    Complex{rec.at("re").get<double>(), rec.value("im", 0.0)});
    }
    return p;
}

inline Json complex_to_json(Complex z) {
    Json j;
    j["re"] = z.real();
    j["im"] = z.imag();
    return j;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Minimal CSV writer: header row + "%.17g" numeric cells, UTF-8.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << format_double(cells[i]);
        out_ << "\n";
    }

    void row_mixed(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

/// Sparse triplet export of the generator matrix (row, col, re, im).
inline void write_generator_matrix_csv(const GeneratorMatrix& G,
                                       const std::filesystem::path& path) {
    CsvWriter csv(path, {"row", "col", "re", "im"});
    for (std::size_t col = 0; col < G.cols.size(); ++col)
        for (const auto& [row, v] : G.cols[col])
            csv.row_mixed({std::to_string(row), std::to_string(col), format_double(v.real()),
                           format_double(v.imag())});
}

inline Json generator_matrix_to_json(const GeneratorMatrix& G) {
    Json j;
    j["N"] = G.N;
    j["dim"] = G.dim();
    Json trips = Json::array();
    for (std::size_t col = 0; col < G.cols.size(); ++col)
        for (const auto& [row, v] : G.cols[col]) {
            Json t;
            t["row"] = row;
            t["col"] = col;
            t["re"] = v.real();
            t["im"] = v.imag();
            trips.push_back(std::move(t));
        }
    j["triplets"] = std::move(trips);
    return j;
}

inline Json certificate_to_json(const RoaCertificate& cert) {
    Json j;
    j["schema"] = 1;
    j["system"] = cert.system_name;
    j["status"] = to_string(cert.status);
    j["N"] = cert.N;
    j["S"] = cert.S;
    j["R"] = cert.R;
    j["bound_kind"] = to_string(cert.kind);
    j["lambda_m"] = cert.lambda_m;
    j["eps1"] = cert.eps1;
    j["eps2"] = cert.eps2;
    j["gamma1"] = cert.gamma1;
    j["gamma2"] = cert.gamma2;
    j["band_width"] = cert.gamma2 - cert.gamma1;
    j["omega"] = std::string("{ x in box(R) : gamma1 < V(x) < gamma2 }");
    j["gamma2_sampling"]["faces_grid"] = cert.gamma2_grid_res;
    j["gamma2_sampling"]["shrink"] = cert.gamma2_shrink;

    Json radius;
    radius["rho"] = cert.radius.rho;
    radius["objective"] = cert.radius.objective;
    radius["window"] = {cert.radius.window_lo, cert.radius.window_hi};
    radius["f_S"] = cert.radius.f_S;
    radius["f_R"] = cert.radius.f_R;
    j["radius_estimate"] = std::move(radius);

    Json nores;
    nores["verified_to"] = cert.nonresonant_to;
    nores["tol"] = cert.resonance_tol;
    nores["min_gap"] = cert.min_gap;
    j["nonresonance"] = std::move(nores);

    Json eigs = Json::array();
    for (const auto& pe : cert.per_eigen) {
        Json e;
        e["lambda"] = complex_to_json(pe.lambda);
        e["weight"] = pe.weight;
        auto src = [](ConstantSource s) {
            return s == ConstantSource::Supplied ? "supplied" : "estimated";
        };
        e["constants"]["M"] = {{"value", pe.constants.M}, {"source", src(pe.constants.source_M)}};
        e["constants"]["M1"] = {{"value", pe.constants.M1}, {"source", src(pe.constants.source_M1)}};
        e["constants"]["M2"] = {{"value", pe.constants.M2}, {"source", src(pe.constants.source_M2)}};
        e["constants"]["window"] = {pe.constants.window_lo, pe.constants.window_hi};
        e["constants"]["m1_monotone_decreasing"] = pe.constants.m1_monotone;
        e["truncation_bound"] = {{"kind", to_string(pe.err.kind)},
                                 {"value", pe.err.value},
                                 {"constant", pe.err.constant}};
        e["sup_R"] = pe.sup_R;
        e["B"] = pe.B;
        e["M_i"] = pe.M_i;
        e["K_i"] = pe.K_i;
        e["defect_sup_R"] = pe.defect_sup_R;
        e["defect_sup_I"] = pe.defect_sup_I;
        Json warns = Json::array();
        for (const auto& w : pe.cond_warnings)
            warns.push_back({{"degree", w.degree}, {"condition_estimate", w.condition_estimate}});
        e["condition_warnings"] = std::move(warns);
        eigs.push_back(std::move(e));
    }
    j["eigenfunctions"] = std::move(eigs);
    j["assumptions"] = cert.assumptions;
    return j;
}

inline void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace kroa
