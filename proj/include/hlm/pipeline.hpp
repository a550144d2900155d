#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlm/config.hpp"
#include "hlm/counting.hpp"
#include "hlm/localdata.hpp"
#include "hlm/oscint.hpp"
#include "hlm/sysmodel.hpp"

namespace hlm {

inline constexpr const char* artifact_version = "0.1.0";

struct stage_record {
    std::string name;
    std::string status;  // "ok", "skipped", "failed"
    std::string reason;
    double seconds = 0.0;
    double work = 0.0;  // stage-specific unit: cells, tuples, nodes
    friend bool operator==(const stage_record&, const stage_record&) = default;
};

struct local_check {
    u64 p = 0;
    bool solvable = false;
    std::string mode;  // "exhaustive" | "randomized"
    std::optional<std::vector<u64>> witness;
    u64 budget_used = 0;
    friend bool operator==(const local_check&, const local_check&) = default;
};

struct probe_result {
    int attempts = 0;
    std::optional<std::vector<double>> point;
    friend bool operator==(const probe_result&, const probe_result&) = default;
};

struct series_summary {
    u64 q_cut = 0;
    u64 p_cut = 0;
    double partial_sum = 0.0;
    double euler_product = 0.0;
    double tail_bound = 0.0;
    double tail_constant_fit = 0.0;
    double tail_exponent = 0.0;
    double tail_product_lower = 0.0;
    std::string certificate;  // "positive", "zero (local obstruction at p)", "inconclusive"
    std::optional<u64> obstruction;
    friend bool operator==(const series_summary&, const series_summary&) = default;
};

struct integral_summary {
    double gamma_cut = 0.0;
    double value = 0.0;
    double error = 0.0;
    double imag = 0.0;
    bool partial = false;
    std::string method;
    std::string note;
    friend bool operator==(const integral_summary&, const integral_summary&) = default;
};

struct prediction {
    u64 P = 0;
    long exponent = 0;  // s - K
    double S = 0.0;
    double S_uncertainty = 0.0;
    double c_J = 0.0;
    double c_J_uncertainty = 0.0;
    double value = 0.0;
    double value_uncertainty = 0.0;
    bool main_term = false;  // false: S <= 0 or c_J <= 0
    std::string note;
    friend bool operator==(const prediction&, const prediction&) = default;
};

struct ratio_row {
    u64 P = 0;
    std::string basis;  // "weighted" | "non_diagonal_weighted"
    double empirical = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;
    bool within_tolerance = false;
    friend bool operator==(const ratio_row&, const ratio_row&) = default;
};

struct experiment_report {
    std::string version = artifact_version;
    std::uint64_t seed = 0;
    int threads = 1;       // requested cap
    int threads_used = 1;  // every stage currently runs on one worker
    experiment_config config;
    bool exclude_diagonal = false;
    std::optional<threshold_verdict> threshold;
    std::vector<local_check> local;
    std::optional<probe_result> probe;
    std::optional<series_summary> series;
    std::optional<integral_summary> integral;
    std::vector<solution_count> counts;
    std::vector<prediction> predictions;
    std::vector<ratio_row> ratios;
    std::vector<stage_record> stages;

    bool any_failed() const {
        for (const auto& s : stages)
            if (s.status == "failed") return true;
        return false;
    }
    const stage_record* stage(const std::string& name) const {
        for (const auto& s : stages)
            if (s.name == name) return &s;
        return nullptr;
    }
    friend bool operator==(const experiment_report& a, const experiment_report& b) {
        return a.version == b.version && a.seed == b.seed && a.threads == b.threads &&
               a.threads_used == b.threads_used && a.config == b.config && a.exclude_diagonal == b.exclude_diagonal &&
               a.threshold.has_value() == b.threshold.has_value() &&
               (!a.threshold || (a.threshold->holds == b.threshold->holds &&
                                 a.threshold->required == b.threshold->required &&
                                 a.threshold->margin == b.threshold->margin)) &&
               a.local == b.local && a.probe == b.probe && a.series == b.series && a.integral == b.integral &&
               a.counts == b.counts && a.predictions == b.predictions && a.ratios == b.ratios &&
               a.stages == b.stages;
    }
};

// Same report with wall-clock fields zeroed, for determinism comparisons.
inline experiment_report without_timing(experiment_report r) {
    for (auto& s : r.stages) s.seconds = 0.0;
    return r;
}

inline bool default_exclude_diagonal(const diagonal_system& sys) {
    return sys.admits_diagonal_family() && sys.s() <= 2 * static_cast<std::size_t>(sys.total_degree());
}

// S * c_J * P^{s-K}. Scaling P by 2 multiplies the value by exactly 2^{s-K}
// because the P power is applied last.
inline prediction assemble_prediction(const series_summary& S, const integral_summary& J, long exponent, u64 P) {
    prediction pr;
    pr.P = P;
    pr.exponent = exponent;
    const bool obstructed = S.obstruction.has_value();
    pr.S = obstructed ? 0.0 : S.partial_sum;
    pr.S_uncertainty = obstructed ? 0.0 : S.tail_bound;
    pr.c_J = J.value;
    pr.c_J_uncertainty = J.error;
    const double scale = std::pow(static_cast<double>(P), static_cast<double>(exponent));
    pr.main_term = pr.S > 0.0 && pr.c_J > 0.0;
    if (!pr.main_term) {
        pr.value = obstructed ? 0.0 : (pr.S * pr.c_J) * scale;
        pr.note = "no main term predicted";
        if (obstructed) pr.note += " (" + S.certificate + ")";
        return pr;
    }
    pr.value = (pr.S * pr.c_J) * scale;
    pr.value_uncertainty = (std::abs(pr.c_J) * pr.S_uncertainty + std::abs(pr.S) * pr.c_J_uncertainty) * scale;
    return pr;
}

inline series_summary summarize_series(const singular_series_estimate& est, const std::vector<local_check>& local) {
    series_summary s;
    s.q_cut = est.q_cut;
    s.p_cut = est.p_cut;
    s.partial_sum = est.partial_sum;
    s.euler_product = est.euler_product;
    s.tail_bound = est.tail_bound;
    s.tail_constant_fit = est.tail_constant_fit;
    s.tail_exponent = est.tail_exponent;
    s.tail_product_lower = est.tail_product_lower;
    for (const auto& c : local)
        if (!c.solvable && c.mode == "exhaustive") {
            s.obstruction = c.p;
            break;
        }
    if (!s.obstruction)
        for (const auto& f : est.factors)
            if (f.value <= 0.0) {
                s.obstruction = f.p;
                break;
            }
    if (s.obstruction)
        s.certificate = "zero (local obstruction at " + std::to_string(*s.obstruction) + ")";
    else
        s.certificate = est.positive ? "positive" : "inconclusive";
    return s;
}

inline integral_method pick_integral_method(const diagonal_system& sys) {
    return sys.t() == 1 ? integral_method::tensor : integral_method::qmc;
}

inline integral_summary summarize_integral(const c_j_estimate& est, double gamma_cut, integral_method m) {
    integral_summary s;
    s.gamma_cut = gamma_cut;
    s.value = est.value;
    s.error = est.error;
    s.imag = est.imag;
    s.partial = est.partial;
    s.method = m == integral_method::tensor ? "tensor" : "qmc";
    s.note = est.note;
    return s;
}

// Standalone prediction: runs the series and integral stages for one P.
inline prediction predict_main_term(const diagonal_system& sys, u64 P, u64 q_cut, double gamma_cut,
                                    u64 p_cut = 100, std::uint64_t seed = 0) {
    singular_series_options so;
    so.p_cut = p_cut;
    std::vector<local_check> local;
    for (u64 p = 2; p <= p_cut; ++p) {
        if (!is_prime(p)) continue;
        auto v = local_solvability(sys, p);
        local.push_back({p, v.solvable, v.mode == search_mode::exhaustive ? "exhaustive" : "randomized", {}, 0});
    }
    auto S = summarize_series(singular_series(sys, q_cut, so), local);
    singular_integral_options io;
    io.method = pick_integral_method(sys);
    io.seed = seed;
    auto J = summarize_integral(singular_integral_normalized(sys, gamma_cut, io), gamma_cut, io.method);
    return assemble_prediction(S, J, static_cast<long>(sys.s()) - static_cast<long>(sys.total_degree()), P);
}

struct run_options {
    int threads = 1;
    local_options local;
    local_budget series_budget;
    count_options counts;
    singular_integral_options integral;  // method and seed are filled in from the config
};

namespace detail {

// Runs body as a timed stage. capacity_error degrades to "skipped"; any
// other exception marks the stage "failed" and later stages still run.
inline bool run_stage(experiment_report& rep, const std::string& name, const std::function<double()>& body) {
    stage_record rec;
    rec.name = name;
    auto t0 = std::chrono::steady_clock::now();
    try {
        rec.work = body();
        rec.status = "ok";
    } catch (const capacity_error& e) {
        rec.status = "skipped";
        rec.reason = e.what();
    } catch (const std::exception& e) {
        rec.status = "failed";
        rec.reason = e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = rec.status == "ok";
    rep.stages.push_back(std::move(rec));
    return ok;
}

inline void skip_stage(experiment_report& rep, const std::string& name, const std::string& reason) {
    rep.stages.push_back({name, "skipped", reason, 0.0, 0.0});
}

} // namespace detail

inline experiment_report run_experiment(const experiment_config& cfg, const run_options& opt = {}) {
    experiment_report rep;
    rep.seed = cfg.seed;
    rep.threads = std::max(1, opt.threads);
    rep.config = cfg;
    const auto& sys = cfg.system;
    rep.exclude_diagonal = cfg.exclude_diagonal.value_or(default_exclude_diagonal(sys));
    if (cfg.s_eps) rep.threshold = threshold_check(static_cast<long>(sys.s()), *cfg.s_eps);
    const long exponent = static_cast<long>(sys.s()) - static_cast<long>(sys.total_degree());

    detail::run_stage(rep, "local", [&] {
        double used = 0;
        local_options lo = opt.local;
        lo.seed = cfg.seed;
        for (u64 p = 2; p <= cfg.p_cut; ++p) {
            if (!is_prime(p)) continue;
            auto v = local_solvability(sys, p, lo);
            rep.local.push_back({p, v.solvable, v.mode == search_mode::exhaustive ? "exhaustive" : "randomized",
                                 v.witness, v.budget_used});
            used += static_cast<double>(v.budget_used);
        }
        return used;
    });

    detail::run_stage(rep, "real-probe", [&] {
        probe_result pr;
        pr.attempts = cfg.real_attempts;
        pr.point = real_solution_probe(sys, cfg.real_attempts, cfg.seed);
        rep.probe = pr;
        return static_cast<double>(cfg.real_attempts);
    });

    detail::run_stage(rep, "series", [&] {
        singular_series_options so;
        so.p_cut = cfg.p_cut;
        so.budget = opt.series_budget;
        rep.series = summarize_series(singular_series(sys, cfg.q_cut, so), rep.local);
        return static_cast<double>(cfg.q_cut);
    });

    detail::run_stage(rep, "integral", [&] {
        auto io = opt.integral;
        io.method = pick_integral_method(sys);
        io.seed = cfg.seed;
        auto est = singular_integral_normalized(sys, cfg.gamma_cut, io);
        rep.integral = summarize_integral(est, cfg.gamma_cut, io.method);
        return static_cast<double>(est.ladder.size());
    });

    if (rep.series && rep.integral) {
        detail::run_stage(rep, "predict", [&] {
            for (u64 P : cfg.P_ladder) rep.predictions.push_back(assemble_prediction(*rep.series, *rep.integral, exponent, P));
            return static_cast<double>(rep.predictions.size());
        });
    } else {
        detail::skip_stage(rep, "predict", "series or integral stage did not complete");
    }

    detail::run_stage(rep, "counts", [&] {
        double work = 0;
        for (u64 P : cfg.P_ladder) {
            prime_table table(P);
            rep.counts.push_back(brute_force_R(sys, table, opt.counts));
            work += static_cast<double>(rep.counts.back().work);
        }
        return work;
    });

    std::string why;
    if (rep.predictions.empty()) why = "no prediction available";
    else if (rep.counts.size() != rep.predictions.size()) why = "counts incomplete";
    else if (!rep.predictions.front().main_term) why = rep.predictions.front().note;
    if (!why.empty()) {
        detail::skip_stage(rep, "ratios", why);
    } else {
        detail::run_stage(rep, "ratios", [&] {
            for (std::size_t i = 0; i < rep.counts.size(); ++i) {
                const auto& c = rep.counts[i];
                const auto& p = rep.predictions[i];
                ratio_row r;
                r.P = c.P;
                r.basis = rep.exclude_diagonal ? "non_diagonal_weighted" : "weighted";
                r.empirical = rep.exclude_diagonal ? c.non_diagonal_weighted() : c.weighted;
                r.predicted = p.value;
                r.ratio = r.empirical / r.predicted;
                r.within_tolerance = std::abs(r.ratio - 1.0) <= cfg.tolerance;
                rep.ratios.push_back(r);
            }
            return static_cast<double>(rep.ratios.size());
        });
    }
    return rep;
}

// ---------- serialization ----------

namespace detail {

// JSON has no inf/nan; those travel as strings.
inline nlohmann::json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline double num(const nlohmann::json& v) {
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw parse_error("report", "bad number string '" + s + "'");
    }
    return v.get<double>();
}

inline u128 parse_u128(const std::string& s) {
    if (s.empty()) throw parse_error("report", "empty integer string");
    u128 v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw parse_error("report", "bad integer string '" + s + "'");
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    return v;
}

// 17 significant digits, classic locale.
inline std::string fmt17(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    std::ostringstream o;
    o.imbue(std::locale::classic());
    o.precision(17);
    o << x;
    return o.str();
}

} // namespace detail

inline std::vector<nlohmann::json> report_records(const experiment_report& r) {
    using nlohmann::json;
    using detail::num;
    std::vector<json> out;
    out.push_back({{"record", "meta"},
                   {"version", r.version},
                   {"seed", r.seed},
                   {"threads", r.threads},
                   {"threads_used", r.threads_used},
                   {"exclude_diagonal", r.exclude_diagonal},
                   {"digest", system_digest(r.config.system)}});
    json cfg = emit_config(r.config);
    cfg["provenance"] = r.config.provenance;
    out.push_back({{"record", "config"}, {"config", cfg}});
    if (r.threshold)
        out.push_back({{"record", "threshold"},
                       {"stage", "config"},
                       {"holds", r.threshold->holds},
                       {"required", r.threshold->required},
                       {"margin", r.threshold->margin}});
    for (const auto& s : r.stages)
        out.push_back({{"record", "stage"},
                       {"name", s.name},
                       {"status", s.status},
                       {"reason", s.reason},
                       {"seconds", num(s.seconds)},
                       {"work", num(s.work)}});
    for (const auto& c : r.local) {
        json j = {{"record", "local"}, {"stage", "local"},   {"p", c.p},
                  {"solvable", c.solvable}, {"mode", c.mode}, {"budget_used", c.budget_used}};
        if (c.witness) j["witness"] = *c.witness;
        out.push_back(j);
    }
    if (r.probe) {
        json j = {{"record", "probe"}, {"stage", "real-probe"}, {"attempts", r.probe->attempts}, {"found", r.probe->point.has_value()}};
        if (r.probe->point) {
            json pt = json::array();
            for (double x : *r.probe->point) pt.push_back(num(x));
            j["point"] = pt;
        }
        out.push_back(j);
    }
    if (r.series) {
        const auto& s = *r.series;
        json j = {{"record", "series"},
                  {"stage", "series"},
                  {"q_cut", s.q_cut},
                  {"p_cut", s.p_cut},
                  {"partial_sum", num(s.partial_sum)},
                  {"euler_product", num(s.euler_product)},
                  {"tail_bound", num(s.tail_bound)},
                  {"tail_constant_fit", num(s.tail_constant_fit)},
                  {"tail_exponent", num(s.tail_exponent)},
                  {"tail_product_lower", num(s.tail_product_lower)},
                  {"certificate", s.certificate}};
        if (s.obstruction) j["obstruction"] = *s.obstruction;
        out.push_back(j);
    }
    if (r.integral) {
        const auto& s = *r.integral;
        out.push_back({{"record", "integral"},
                       {"stage", "integral"},
                       {"gamma_cut", num(s.gamma_cut)},
                       {"value", num(s.value)},
                       {"error", num(s.error)},
                       {"imag", num(s.imag)},
                       {"partial", s.partial},
                       {"method", s.method},
                       {"note", s.note}});
    }
    for (const auto& p : r.predictions)
        out.push_back({{"record", "prediction"},
                       {"stage", "predict"},
                       {"P", p.P},
                       {"exponent", p.exponent},
                       {"S", num(p.S)},
                       {"S_uncertainty", num(p.S_uncertainty)},
                       {"c_J", num(p.c_J)},
                       {"c_J_uncertainty", num(p.c_J_uncertainty)},
                       {"value", num(p.value)},
                       {"value_uncertainty", num(p.value_uncertainty)},
                       {"main_term", p.main_term},
                       {"note", p.note}});
    for (const auto& c : r.counts)
        out.push_back({{"record", "count"},
                       {"stage", "counts"},
                       {"P", c.P},
                       {"digest", c.digest},
                       {"unweighted", to_string_u128(c.unweighted)},
                       {"weighted", num(c.weighted)},
                       {"has_diagonal_family", c.has_diagonal_family},
                       {"diagonal_unweighted", to_string_u128(c.diagonal_unweighted)},
                       {"diagonal_weighted", num(c.diagonal_weighted)},
                       {"work", num(static_cast<double>(c.work))}});
    for (const auto& q : r.ratios)
        out.push_back({{"record", "ratio"},
                       {"stage", "ratios"},
                       {"P", q.P},
                       {"basis", q.basis},
                       {"empirical", num(q.empirical)},
                       {"predicted", num(q.predicted)},
                       {"ratio", num(q.ratio)},
                       {"within_tolerance", q.within_tolerance}});
    return out;
}

inline std::string to_jsonl(const experiment_report& r) {
    std::string out;
    for (const auto& j : report_records(r)) out += j.dump() + "\n";
    return out;
}

inline experiment_report from_jsonl(const std::string& text) {
    using detail::num;
    experiment_report r;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool saw_config = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("line " + std::to_string(lineno), e.what());
        }
        const std::string kind = j.at("record").get<std::string>();
        if (kind == "meta") {
            r.version = j.at("version").get<std::string>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.threads = j.at("threads").get<int>();
            r.threads_used = j.at("threads_used").get<int>();
            r.exclude_diagonal = j.at("exclude_diagonal").get<bool>();
        } else if (kind == "config") {
            auto c = j.at("config");
            auto prov = c.at("provenance").get<std::map<std::string, std::string>>();
            c.erase("provenance");
            r.config = parse_config(c);
            r.config.provenance = std::move(prov);
            saw_config = true;
        } else if (kind == "threshold") {
            threshold_verdict t;
            t.holds = j.at("holds").get<bool>();
            t.required = j.at("required").get<long>();
            t.margin = j.at("margin").get<long>();
            r.threshold = t;
        } else if (kind == "stage") {
            r.stages.push_back({j.at("name").get<std::string>(), j.at("status").get<std::string>(),
                                j.at("reason").get<std::string>(), num(j.at("seconds")), num(j.at("work"))});
        } else if (kind == "local") {
            local_check c;
            c.p = j.at("p").get<u64>();
            c.solvable = j.at("solvable").get<bool>();
            c.mode = j.at("mode").get<std::string>();
            c.budget_used = j.at("budget_used").get<u64>();
            if (j.contains("witness")) c.witness = j.at("witness").get<std::vector<u64>>();
            r.local.push_back(std::move(c));
        } else if (kind == "probe") {
            probe_result p;
            p.attempts = j.at("attempts").get<int>();
            if (j.contains("point")) {
                std::vector<double> pt;
                for (const auto& x : j.at("point")) pt.push_back(num(x));
                p.point = std::move(pt);
            }
            r.probe = std::move(p);
        } else if (kind == "series") {
            series_summary s;
            s.q_cut = j.at("q_cut").get<u64>();
            s.p_cut = j.at("p_cut").get<u64>();
            s.partial_sum = num(j.at("partial_sum"));
            s.euler_product = num(j.at("euler_product"));
            s.tail_bound = num(j.at("tail_bound"));
            s.tail_constant_fit = num(j.at("tail_constant_fit"));
            s.tail_exponent = num(j.at("tail_exponent"));
            s.tail_product_lower = num(j.at("tail_product_lower"));
            s.certificate = j.at("certificate").get<std::string>();
            if (j.contains("obstruction")) s.obstruction = j.at("obstruction").get<u64>();
            r.series = std::move(s);
        } else if (kind == "integral") {
            integral_summary s;
            s.gamma_cut = num(j.at("gamma_cut"));
            s.value = num(j.at("value"));
            s.error = num(j.at("error"));
            s.imag = num(j.at("imag"));
            s.partial = j.at("partial").get<bool>();
            s.method = j.at("method").get<std::string>();
            s.note = j.at("note").get<std::string>();
            r.integral = std::move(s);
        } else if (kind == "prediction") {
            prediction p;
            p.P = j.at("P").get<u64>();
            p.exponent = j.at("exponent").get<long>();
            p.S = num(j.at("S"));
            p.S_uncertainty = num(j.at("S_uncertainty"));
            p.c_J = num(j.at("c_J"));
            p.c_J_uncertainty = num(j.at("c_J_uncertainty"));
            p.value = num(j.at("value"));
            p.value_uncertainty = num(j.at("value_uncertainty"));
            p.main_term = j.at("main_term").get<bool>();
            p.note = j.at("note").get<std::string>();
            r.predictions.push_back(std::move(p));
        } else if (kind == "count") {
            solution_count c;
            c.P = j.at("P").get<u64>();
            c.digest = j.at("digest").get<std::string>();
            c.unweighted = detail::parse_u128(j.at("unweighted").get<std::string>());
            c.weighted = num(j.at("weighted"));
            c.has_diagonal_family = j.at("has_diagonal_family").get<bool>();
            c.diagonal_unweighted = detail::parse_u128(j.at("diagonal_unweighted").get<std::string>());
            c.diagonal_weighted = num(j.at("diagonal_weighted"));
            c.work = num(j.at("work"));
            r.counts.push_back(std::move(c));
        } else if (kind == "ratio") {
            ratio_row q;
            q.P = j.at("P").get<u64>();
            q.basis = j.at("basis").get<std::string>();
            q.empirical = num(j.at("empirical"));
            q.predicted = num(j.at("predicted"));
            q.ratio = num(j.at("ratio"));
            q.within_tolerance = j.at("within_tolerance").get<bool>();
            r.ratios.push_back(q);
        } else {
            throw parse_error("line " + std::to_string(lineno), "unknown record '" + kind + "'");
        }
    }
    if (!saw_config) throw parse_error("report", "no config record");
    return r;
}

// section,P,metric,value; one row per (P, stage metric). P is empty for
// P-independent metrics.
inline std::string to_csv(const experiment_report& r) {
    using detail::fmt17;
    std::ostringstream o;
    o.imbue(std::locale::classic());
    o << "section,P,metric,value\n";
    auto row = [&](const std::string& sec, std::optional<u64> P, const std::string& metric, const std::string& v) {
        o << sec << ',' << (P ? std::to_string(*P) : std::string()) << ',' << metric << ',' << v << '\n';
    };
    row("meta", {}, "seed", std::to_string(r.seed));
    row("meta", {}, "threads", std::to_string(r.threads));
    row("meta", {}, "exclude_diagonal", r.exclude_diagonal ? "1" : "0");
    for (const auto& s : r.stages) {
        row("stage", {}, s.name + ".status", s.status);
        row("stage", {}, s.name + ".seconds", fmt17(s.seconds));
        row("stage", {}, s.name + ".work", fmt17(s.work));
    }
    for (const auto& c : r.local) row("local", {}, "solvable_mod_" + std::to_string(c.p), c.solvable ? "1" : "0");
    if (r.probe) row("real-probe", {}, "found", r.probe->point ? "1" : "0");
    if (r.series) {
        const auto& s = *r.series;
        row("series", {}, "partial_sum", fmt17(s.partial_sum));
        row("series", {}, "euler_product", fmt17(s.euler_product));
        row("series", {}, "tail_bound", fmt17(s.tail_bound));
        row("series", {}, "tail_constant_fit", fmt17(s.tail_constant_fit));
        row("series", {}, "tail_exponent", fmt17(s.tail_exponent));
        row("series", {}, "certificate", "\"" + s.certificate + "\"");
    }
    if (r.integral) {
        row("integral", {}, "c_J", fmt17(r.integral->value));
        row("integral", {}, "c_J_error", fmt17(r.integral->error));
    }
    for (const auto& p : r.predictions) {
        row("predict", p.P, "value", fmt17(p.value));
        row("predict", p.P, "value_uncertainty", fmt17(p.value_uncertainty));
    }
    for (const auto& c : r.counts) {
        row("counts", c.P, "unweighted", to_string_u128(c.unweighted));
        row("counts", c.P, "weighted", fmt17(c.weighted));
        row("counts", c.P, "diagonal_unweighted", to_string_u128(c.diagonal_unweighted));
        row("counts", c.P, "diagonal_weighted", fmt17(c.diagonal_weighted));
    }
    for (const auto& q : r.ratios) {
        row("ratios", q.P, "empirical", fmt17(q.empirical));
        row("ratios", q.P, "ratio", fmt17(q.ratio));
    }
    return o.str();
}

// FNV-1a over the integer fields only, so it matches across platforms even if
// floating-point results drift in the last place.
inline std::string report_digest(const experiment_report& r) {
    std::ostringstream o;
    o << system_digest(r.config.system) << '|' << r.seed << '|' << r.config.q_cut << '|' << r.config.p_cut;
    for (u64 P : r.config.P_ladder) o << '|' << P;
    for (const auto& c : r.local) o << "|l" << c.p << ':' << c.solvable;
    if (r.series && r.series->obstruction) o << "|o" << *r.series->obstruction;
    for (const auto& c : r.counts)
        o << "|c" << c.P << ':' << to_string_u128(c.unweighted) << ':' << to_string_u128(c.diagonal_unweighted);
    const std::string s = o.str();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

enum class report_format { csv, jsonl };

inline std::string render(const experiment_report& r, report_format f) {
    return f == report_format::csv ? to_csv(r) : to_jsonl(r);
}

// Writes to path, or returns the document when path is empty.
inline std::string emit_report(const experiment_report& r, report_format f, const std::string& path = {}) {
    std::string doc = render(r, f);
    if (path.empty()) return doc;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path, "cannot open for writing");
    out << doc;
    if (!out) throw io_error(path, "write failed");
    return doc;
}

} // namespace hlm
