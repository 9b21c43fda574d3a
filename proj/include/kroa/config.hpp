#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kroa/bounds.hpp"
#include "kroa/system.hpp"

namespace kroa {

/// One term of a polynomial component: coefficient times x^k.
struct TermSpec {
    std::vector<std::uint32_t> k;
    double c = 0.0;
};

struct GridConfig {
    std::uint32_t gamma2_faces = 2001;
    std::uint32_t export_res = 801;
    std::uint32_t surrogate = 101;
    std::uint32_t radius_scan = 101;
};

struct ValidationConfig {
    std::uint32_t samples = 1000;
    double horizon = 0.0;  // 0: auto, 50 / |lambda_m|
    std::uint64_t seed = 20260809;
};

struct JobConfig {
    std::string name = "system";
    std::size_t dim = 0;
    std::vector<std::vector<TermSpec>> field;
    std::vector<double> domain_box;

    std::uint32_t N = 2;
    std::uint32_t N_max = 4;

    std::optional<double> S, R;
    double f_S = 0.9, f_R = 0.87;

    BoundKind bound = BoundKind::Prop2;

    // optional user-supplied tail constants, one per retained eigenfunction
    // (a single value broadcasts)
    std::vector<double> M_supplied, M1_supplied, M2_supplied;

    GridConfig grids;
    ValidationConfig validation;
    std::string output_dir = "out";

    SystemDef make_system() const {
        std::uint32_t maxdeg = 1;
        for (const auto& comp : field)
            for (const auto& t : comp) {
                std::uint32_t d = 0;
                for (auto e : t.k) d += e;
                maxdeg = std::max(maxdeg, d);
            }
        std::vector<PowerSeries> F;
        for (const auto& comp : field) {
            PowerSeries f(dim, maxdeg);
            for (const auto& t : comp) {
                MultiIndex k;
                k.k = t.k;
                f.add_coeff(k, Complex{t.c, 0.0});
            }
            F.push_back(std::move(f));
        }
        return SystemDef(std::move(F), domain_box, name);
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw std::invalid_argument("load_config: unknown key \"" + key + "\" in " + where);
}

inline BoundKind parse_bound_kind(const std::string& s) {
    if (s == "prop1") return BoundKind::Prop1;
    if (s == "prop2") return BoundKind::Prop2;
    if (s == "prop3") return BoundKind::Prop3;
    throw std::invalid_argument("load_config: bound must be prop1|prop2|prop3, got \"" + s + "\"");
}

inline std::vector<double> parse_scalar_or_array(const nlohmann::json& v, const std::string& where) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_array()) {
        for (const auto& e : v) out.push_back(e.get<double>());
    } else {
        throw std::invalid_argument("load_config: " + where + " must be a number or array");
    }
    return out;
}

}  // namespace detail

inline JobConfig parse_config(const nlohmann::json& j) {
    using detail::reject_unknown_keys;
    JobConfig cfg;
    reject_unknown_keys(j, {"schema", "system", "order", "radius", "bound", "constants", "grids",
                            "validation", "output_dir"},
                        "top level");
    if (j.value("schema", 1) != 1)
        throw std::invalid_argument("load_config: unsupported schema version");

    const auto& sys = j.at("system");
    reject_unknown_keys(sys, {"name", "dim", "field", "domain_box"}, "system");
    cfg.name = sys.value("name", "system");
    cfg.dim = sys.at("dim").get<std::size_t>();
    if (cfg.dim < 1) throw std::invalid_argument("load_config: system.dim must be >= 1");
    for (const auto& comp : sys.at("field")) {
        std::vector<TermSpec> terms;
        for (const auto& t : comp) {
            reject_unknown_keys(t, {"k", "c"}, "system.field term");
            TermSpec ts;
            ts.k = t.at("k").get<std::vector<std::uint32_t>>();
            if (ts.k.size() != cfg.dim)
                throw std::invalid_argument("load_config: field exponent length != system.dim");
            ts.c = t.at("c").get<double>();
            terms.push_back(std::move(ts));
        }
        cfg.field.push_back(std::move(terms));
    }
    if (cfg.field.size() != cfg.dim)
        throw std::invalid_argument("load_config: field must have exactly system.dim components");
    if (sys.contains("domain_box")) {
        cfg.domain_box = sys.at("domain_box").get<std::vector<double>>();
        if (cfg.domain_box.size() != cfg.dim)
            throw std::invalid_argument("load_config: domain_box length != system.dim");
    }

    const auto& order = j.at("order");
    reject_unknown_keys(order, {"N", "N_max"}, "order");
    cfg.N = order.at("N").get<std::uint32_t>();
    cfg.N_max = order.at("N_max").get<std::uint32_t>();
    if (cfg.N < 2) throw std::invalid_argument("load_config: order.N must be >= 2");
    if (cfg.N_max <= cfg.N) throw std::invalid_argument("load_config: order.N_max must be > order.N");

    if (j.contains("radius")) {
        const auto& rad = j.at("radius");
        reject_unknown_keys(rad, {"S", "R", "f_S", "f_R"}, "radius");
        if (rad.contains("S")) cfg.S = rad.at("S").get<double>();
        if (rad.contains("R")) cfg.R = rad.at("R").get<double>();
        cfg.f_S = rad.value("f_S", cfg.f_S);
        cfg.f_R = rad.value("f_R", cfg.f_R);
        if (cfg.S && cfg.R && !(*cfg.R < *cfg.S))
            throw std::invalid_argument("load_config: radius must satisfy R < S");
        if (cfg.S && !(*cfg.S > 0)) throw std::invalid_argument("load_config: radius.S must be > 0");
        if (cfg.R && !(*cfg.R > 0)) throw std::invalid_argument("load_config: radius.R must be > 0");
    }

    if (j.contains("bound")) cfg.bound = detail::parse_bound_kind(j.at("bound").get<std::string>());

    if (j.contains("constants")) {
        const auto& con = j.at("constants");
        reject_unknown_keys(con, {"M", "M1", "M2"}, "constants");
        if (con.contains("M")) cfg.M_supplied = detail::parse_scalar_or_array(con.at("M"), "constants.M");
        if (con.contains("M1"))
            cfg.M1_supplied = detail::parse_scalar_or_array(con.at("M1"), "constants.M1");
        if (con.contains("M2"))
            cfg.M2_supplied = detail::parse_scalar_or_array(con.at("M2"), "constants.M2");
    }

    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        reject_unknown_keys(g, {"gamma2_faces", "export", "surrogate", "radius_scan"}, "grids");
        cfg.grids.gamma2_faces = g.value("gamma2_faces", cfg.grids.gamma2_faces);
        cfg.grids.export_res = g.value("export", cfg.grids.export_res);
        cfg.grids.surrogate = g.value("surrogate", cfg.grids.surrogate);
        cfg.grids.radius_scan = g.value("radius_scan", cfg.grids.radius_scan);
        for (std::uint32_t r : {cfg.grids.gamma2_faces, cfg.grids.export_res, cfg.grids.surrogate,
                                cfg.grids.radius_scan})
            if (r < 2) throw std::invalid_argument("load_config: grid resolutions must be >= 2");
    }

    if (j.contains("validation")) {
        const auto& v = j.at("validation");
        reject_unknown_keys(v, {"samples", "horizon", "seed"}, "validation");
        cfg.validation.samples = v.value("samples", cfg.validation.samples);
        cfg.validation.horizon = v.value("horizon", cfg.validation.horizon);
        cfg.validation.seed = v.value("seed", cfg.validation.seed);
    }

    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    return cfg;
}

inline JobConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("load_config: parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace kroa
