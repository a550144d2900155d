#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlm/error.hpp"
#include "hlm/sysmodel.hpp"

namespace hlm {

// Parameters of one experiment. Every knob that the theory only fixes
// existentially (delta, A, truncations) is explicit here.
struct experiment_config {
    diagonal_system system;
    u64 P = 0;
    std::vector<u64> P_ladder;  // empirical counts are taken at each of these
    double delta = 0.0;
    u64 q_cut = 1000;
    double gamma_cut = 50.0;
    u64 samples = 10000;
    std::uint64_t seed = 0;
    double tolerance = 0.15;
    u64 p_cut = 100;
    double A_inner = 2.0;
    std::optional<long> s_eps;
    int real_attempts = 64;
    std::optional<bool> exclude_diagonal;  // unset: decided from the system

    // Which fields came from the document ("config") and which were filled in ("default").
    std::map<std::string, std::string> provenance;

    friend bool operator==(const experiment_config&, const experiment_config&) = default;
};

inline double default_delta(const diagonal_system& sys) {
    double k = sys.max_degree();
    return std::min(0.05, 1.0 / (4.0 * static_cast<double>(sys.t()) * (k * k + k + 1.0)));
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& doc, const std::string& key) {
    if (!doc.contains(key)) throw parse_error(key, "required field missing");
    return doc.at(key);
}

inline u64 as_positive_int(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw parse_error(path, "expected an integer");
    if (v.is_number_integer() && v.get<i64>() <= 0) throw parse_error(path, "must be positive");
    return v.get<u64>();
}

inline double as_number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw parse_error(path, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw parse_error(path, "must be finite");
    return x;
}

} // namespace detail

inline experiment_config parse_config(const nlohmann::json& doc) {
    using detail::as_number;
    using detail::as_positive_int;
    if (!doc.is_object()) throw parse_error("$", "config document must be an object");
    static const std::set<std::string> known = {"u",         "k",       "P",        "P_ladder", "delta",
                                                "q_cut",     "gamma_cut", "samples", "seed",     "tolerance",
                                                "p_cut",     "A_inner", "s_eps",    "real_attempts",
                                                "exclude_diagonal"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!known.count(it.key())) throw parse_error(it.key(), "unknown field");

    experiment_config cfg;
    raw_system raw;
    const auto& u = detail::require(doc, "u");
    if (!u.is_array() || u.empty()) throw parse_error("u", "expected a non-empty array of rows");
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::string path = "u[" + std::to_string(i) + "]";
        if (!u[i].is_array()) throw parse_error(path, "expected an array of coefficients");
        std::vector<i64> row;
        for (std::size_t j = 0; j < u[i].size(); ++j) {
            if (!u[i][j].is_number_integer()) throw parse_error(path + "[" + std::to_string(j) + "]", "expected an integer");
            row.push_back(u[i][j].get<i64>());
        }
        raw.u.push_back(std::move(row));
    }
    const auto& k = detail::require(doc, "k");
    if (!k.is_array()) throw parse_error("k", "expected an array of exponents");
    for (std::size_t j = 0; j < k.size(); ++j)
        raw.k.push_back(static_cast<unsigned>(as_positive_int(k[j], "k[" + std::to_string(j) + "]")));
    try {
        cfg.system = validate(std::move(raw));
    } catch (const validation_error& e) {
        throw parse_error("u/k", e.what());
    }
    cfg.provenance["u"] = cfg.provenance["k"] = "config";

    cfg.P = as_positive_int(detail::require(doc, "P"), "P");
    cfg.provenance["P"] = "config";

    auto field = [&](const char* key, auto&& read, auto& target) {
        if (doc.contains(key)) {
            target = read(doc.at(key), std::string(key));
            cfg.provenance[key] = "config";
        } else {
            cfg.provenance[key] = "default";
        }
    };
    auto read_num = [](const nlohmann::json& v, const std::string& p) { return as_number(v, p); };
    auto read_int = [](const nlohmann::json& v, const std::string& p) { return as_positive_int(v, p); };

    cfg.delta = default_delta(cfg.system);
    field("delta", read_num, cfg.delta);
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw parse_error("delta", "must lie in (0, 1)");

    field("q_cut", read_int, cfg.q_cut);
    if (cfg.q_cut < 2) throw parse_error("q_cut", "must be at least 2");
    field("gamma_cut", read_num, cfg.gamma_cut);
    if (cfg.gamma_cut < 0.0) throw parse_error("gamma_cut", "must be non-negative");
    field("samples", read_int, cfg.samples);
    field("tolerance", read_num, cfg.tolerance);
    if (!(cfg.tolerance > 0.0)) throw parse_error("tolerance", "must be positive");
    field("p_cut", read_int, cfg.p_cut);
    if (cfg.p_cut < 2) throw parse_error("p_cut", "must be at least 2");
    field("A_inner", read_num, cfg.A_inner);
    if (!(cfg.A_inner > 0.0)) throw parse_error("A_inner", "must be positive");

    if (doc.contains("seed")) {
        const auto& v = doc.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<i64>() >= 0))
            throw parse_error("seed", "expected a non-negative integer");
        cfg.seed = v.get<std::uint64_t>();
        cfg.provenance["seed"] = "config";
    } else {
        cfg.provenance["seed"] = "default";
    }
    if (doc.contains("s_eps")) {
        cfg.s_eps = static_cast<long>(as_positive_int(doc.at("s_eps"), "s_eps"));
        cfg.provenance["s_eps"] = "config";
    }
    if (doc.contains("real_attempts")) {
        cfg.real_attempts = static_cast<int>(as_positive_int(doc.at("real_attempts"), "real_attempts"));
        cfg.provenance["real_attempts"] = "config";
    } else {
        cfg.provenance["real_attempts"] = "default";
    }
    if (doc.contains("exclude_diagonal")) {
        if (!doc.at("exclude_diagonal").is_boolean()) throw parse_error("exclude_diagonal", "expected a boolean");
        cfg.exclude_diagonal = doc.at("exclude_diagonal").get<bool>();
        cfg.provenance["exclude_diagonal"] = "config";
    }
    if (doc.contains("P_ladder")) {
        const auto& l = doc.at("P_ladder");
        if (!l.is_array() || l.empty()) throw parse_error("P_ladder", "expected a non-empty array");
        for (std::size_t i = 0; i < l.size(); ++i)
            cfg.P_ladder.push_back(as_positive_int(l[i], "P_ladder[" + std::to_string(i) + "]"));
        cfg.provenance["P_ladder"] = "config";
    } else {
        cfg.P_ladder = {cfg.P};
        cfg.provenance["P_ladder"] = "default";
    }
    return cfg;
}

inline experiment_config parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error("$", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

// Full document with every field explicit; parse_config(emit_config(c)) == c
// up to provenance labels.
inline nlohmann::json emit_config(const experiment_config& cfg) {
    nlohmann::json doc;
    doc["u"] = cfg.system.u();
    doc["k"] = cfg.system.k();
    doc["P"] = cfg.P;
    doc["P_ladder"] = cfg.P_ladder;
    doc["delta"] = cfg.delta;
    doc["q_cut"] = cfg.q_cut;
    doc["gamma_cut"] = cfg.gamma_cut;
    doc["samples"] = cfg.samples;
    doc["seed"] = cfg.seed;
    doc["tolerance"] = cfg.tolerance;
    doc["p_cut"] = cfg.p_cut;
    doc["A_inner"] = cfg.A_inner;
    doc["real_attempts"] = cfg.real_attempts;
    if (cfg.s_eps) doc["s_eps"] = *cfg.s_eps;
    if (cfg.exclude_diagonal) doc["exclude_diagonal"] = *cfg.exclude_diagonal;
    return doc;
}

} // namespace hlm
