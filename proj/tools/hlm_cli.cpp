// Command-line front end. Exit codes: 0 success, 2 config or usage error,
// 3 stage failure.

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlm/hlm.hpp"

namespace {

using nlohmann::json;
using namespace hlm;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_stage = 3;

struct config_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct stage_failure : std::runtime_error {
    std::string stage;
    stage_failure(std::string s, const std::string& what) : std::runtime_error(what), stage(std::move(s)) {}
};

struct globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out;
    std::string format = "jsonl";
};

experiment_config load_config(const globals& g) {
    if (g.config_path.empty()) throw config_failure("--config is required for this subcommand");
    std::ifstream in(g.config_path);
    if (!in) throw config_failure(g.config_path + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    experiment_config cfg;
    try {
        cfg = parse_config(buf.str());
    } catch (const hlm::error& e) {
        throw config_failure(g.config_path + ": " + e.what());
    }
    if (g.seed) {
        cfg.seed = *g.seed;
        cfg.provenance["seed"] = "cli";
    }
    return cfg;
}

template <class F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const config_failure&) {
        throw;
    } catch (const std::exception& e) {
        throw stage_failure(name, e.what());
    }
}

json jnum(double x) { return detail::num(x); }

std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s.find_first_of(",\"\n ") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_float()) return detail::fmt17(v.get<double>());
    if (v.is_number()) return v.dump();
    if (v.is_array()) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : " ") + csv_cell(x);
        return "\"" + s + "\"";
    }
    return "\"" + v.dump() + "\"";
}

// Flat records out as JSON lines or as a CSV table over the union of keys
// (first-seen order).
std::string render_records(const std::vector<json>& recs, const std::string& format) {
    std::ostringstream o;
    o.imbue(std::locale::classic());
    if (format == "jsonl") {
        for (const auto& r : recs) o << r.dump() << '\n';
        return o.str();
    }
    std::vector<std::string> cols;
    std::set<std::string> seen;
    for (const auto& r : recs)
        for (auto it = r.begin(); it != r.end(); ++it)
            if (seen.insert(it.key()).second) cols.push_back(it.key());
    for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i];
    o << '\n';
    for (const auto& r : recs) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) o << ',';
            if (r.contains(cols[i])) o << csv_cell(r.at(cols[i]));
        }
        o << '\n';
    }
    return o.str();
}

void write_out(const globals& g, const std::string& doc) {
    if (g.out.empty()) {
        std::cout << doc;
        return;
    }
    std::ofstream f(g.out, std::ios::binary);
    if (!f) throw io_error(g.out, "cannot open for writing");
    f << doc;
    if (!f) throw io_error(g.out, "write failed");
}

alpha_point parse_alpha(const std::vector<std::string>& items) {
    bool all_rational = true;
    for (const auto& s : items) all_rational = all_rational && s.find('/') != std::string::npos;
    try {
        if (all_rational) {
            std::vector<rational_coord> rs;
            for (const auto& s : items) {
                auto slash = s.find('/');
                rs.push_back({std::stoll(s.substr(0, slash)), std::stoull(s.substr(slash + 1))});
            }
            return alpha_point::from_rationals(rs);
        }
        std::vector<double> xs;
        for (const auto& s : items) {
            auto slash = s.find('/');
            xs.push_back(slash == std::string::npos ? std::stod(s)
                                                    : std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1)));
        }
        return alpha_point::from_reals(xs);
    } catch (const std::logic_error&) {
        throw config_failure("--alpha: expected decimals or a/q fractions");
    }
}

json cplx_json(cplx z) { return json::array({jnum(z.real()), jnum(z.imag())}); }

std::vector<std::vector<i64>> distinct_rows(const diagonal_system& sys) {
    std::set<std::vector<i64>> rows(sys.u().begin(), sys.u().end());
    return {rows.begin(), rows.end()};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Experiments on diagonal systems in prime variables"};
    app.require_subcommand(1);
    app.fallthrough();
    globals g;
    app.add_option("--config", g.config_path, "experiment config (JSON)");
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_option("--threads", g.threads, "worker cap, recorded in reports")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output path (default stdout)");
    app.add_option("--format", g.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

    auto* validate_cmd = app.add_subcommand("validate", "parse and echo a config with field provenance");

    auto* local_cmd = app.add_subcommand("local", "solvability mod p and local factors A(q)");
    u64 local_qmax = 0;
    local_cmd->add_option("--q-max", local_qmax, "also tabulate A(q), M(q) for q <= this");

    auto* sums_cmd = app.add_subcommand("sums", "prime exponential sums at alpha");
    std::vector<std::string> sums_alpha;
    std::vector<double> vaughan_X;
    sums_cmd->add_option("--alpha", sums_alpha, "one coordinate per equation, decimal or a/q")->required();
    sums_cmd->add_option("--vaughan", vaughan_X, "Vaughan cuts X to decompose at");

    auto* arcs_cmd = app.add_subcommand("arcs", "major/minor classification or minor-arc decay scan");
    std::vector<std::string> arcs_alpha;
    std::size_t scan_samples = 0;
    arcs_cmd->add_option("--alpha", arcs_alpha, "classify this point");
    arcs_cmd->add_option("--scan", scan_samples, "minor-arc samples per P over the ladder");

    auto* series_cmd = app.add_subcommand("series", "singular series with Euler factors");
    auto* integral_cmd = app.add_subcommand("integral", "normalized singular integral c_J");

    auto* mv_cmd = app.add_subcommand("meanvalue", "exact mean value counts J_{ell,k}(P)");
    unsigned mv_ell = 2;
    std::vector<unsigned> mv_k{1, 2};
    std::vector<u64> mv_P;
    mv_cmd->add_option("--ell", mv_ell, "number of variables per side");
    mv_cmd->add_option("--k", mv_k, "exponents");
    mv_cmd->add_option("--P", mv_P, "ladder of P values")->required();

    auto* count_cmd = app.add_subcommand("count", "brute-force weighted counts over the P ladder");
    auto* predict_cmd = app.add_subcommand("predict", "predicted main term over the P ladder");
    auto* run_cmd = app.add_subcommand("run", "full experiment report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        std::vector<json> recs;
        if (*validate_cmd) {
            auto cfg = load_config(g);
            json doc = emit_config(cfg);
            doc["provenance"] = cfg.provenance;
            doc["digest"] = system_digest(cfg.system);
            doc["default_exclude_diagonal"] = default_exclude_diagonal(cfg.system);
            if (cfg.s_eps) {
                auto t = threshold_check(static_cast<long>(cfg.system.s()), *cfg.s_eps);
                doc["threshold"] = {{"holds", t.holds}, {"required", t.required}, {"margin", t.margin}};
            }
            recs.push_back(doc);
        } else if (*local_cmd) {
            auto cfg = load_config(g);
            stage("local", [&] {
                local_options lo;
                lo.seed = cfg.seed;
                for (u64 p = 2; p <= cfg.p_cut; ++p) {
                    if (!is_prime(p)) continue;
                    auto v = local_solvability(cfg.system, p, lo);
                    json r = {{"record", "solvability"},
                              {"p", p},
                              {"solvable", v.solvable},
                              {"mode", v.mode == search_mode::exhaustive ? "exhaustive" : "randomized"}};
                    if (v.witness) r["witness"] = *v.witness;
                    recs.push_back(r);
                }
                for (u64 q = 1; q <= local_qmax; ++q) {
                    factor_method m;
                    double a = local_factor_A(cfg.system, q, {}, &m);
                    json r = {{"record", "factor"}, {"q", q}, {"A_q", jnum(a)}, {"method", to_string(m)}};
                    try {
                        r["M_q"] = count_M(cfg.system, q).str();
                    } catch (const capacity_error&) {
                    }
                    recs.push_back(r);
                }
                return 0;
            });
        } else if (*sums_cmd) {
            auto cfg = load_config(g);
            auto alpha = parse_alpha(sums_alpha);
            if (alpha.size() != cfg.system.t()) throw config_failure("--alpha needs one coordinate per equation");
            stage("sums", [&] {
                prime_table table(cfg.P);
                for (const auto& row : distinct_rows(cfg.system)) {
                    json r = {{"record", "f"},
                              {"row", row},
                              {"P", cfg.P},
                              {"f", cplx_json(prime_exp_sum(alpha, row, cfg.system.k(), table))},
                              {"theta", jnum(table.theta())}};
                    recs.push_back(r);
                    for (double X : vaughan_X) {
                        auto parts = vaughan_decompose(alpha, row, cfg.system.k(), table, X);
                        recs.push_back({{"record", "vaughan"},
                                        {"row", row},
                                        {"X", jnum(X)},
                                        {"S1", cplx_json(parts.S1)},
                                        {"S2", cplx_json(parts.S2)},
                                        {"S3", cplx_json(parts.S3)},
                                        {"S4", cplx_json(parts.S4)},
                                        {"F", cplx_json(von_mangoldt_sum(alpha, row, cfg.system.k(), table))}});
                    }
                }
                return 0;
            });
        } else if (*arcs_cmd) {
            auto cfg = load_config(g);
            if (arcs_alpha.empty() && scan_samples == 0) throw config_failure("arcs needs --alpha or --scan");
            stage("arcs", [&] {
                if (!arcs_alpha.empty()) {
                    auto alpha = parse_alpha(arcs_alpha);
                    auto lab = classify(alpha, static_cast<double>(cfg.P), cfg.delta, cfg.system.k(),
                                        {cfg.A_inner, 10'000});
                    json r = {{"record", "arc"}, {"P", cfg.P}, {"delta", jnum(cfg.delta)},
                              {"kind", to_string(lab.kind)}, {"zone", to_string(lab.zone)}};
                    if (lab.approx) {
                        r["q"] = lab.approx->q;
                        r["a"] = lab.approx->a;
                    }
                    recs.push_back(r);
                }
                if (scan_samples) {
                    decay_options d;
                    d.delta = cfg.delta;
                    d.A_inner = cfg.A_inner;
                    for (const auto& row : minor_decay_scan(cfg.system, cfg.P_ladder, scan_samples, cfg.seed, d))
                        recs.push_back({{"record", "decay"},
                                        {"P", row.P},
                                        {"theta", jnum(row.theta)},
                                        {"minor_samples", row.minor_samples},
                                        {"discarded_major", row.discarded_major},
                                        {"median", jnum(row.median)},
                                        {"sup", jnum(row.sup)}});
                }
                return 0;
            });
        } else if (*series_cmd) {
            auto cfg = load_config(g);
            stage("series", [&] {
                singular_series_options so;
                so.p_cut = cfg.p_cut;
                auto est = singular_series(cfg.system, cfg.q_cut, so);
                recs.push_back({{"record", "series"},
                                {"q_cut", est.q_cut},
                                {"partial_sum", jnum(est.partial_sum)},
                                {"p_cut", est.p_cut},
                                {"euler_product", jnum(est.euler_product)},
                                {"tail_bound", jnum(est.tail_bound)},
                                {"tail_constant_fit", jnum(est.tail_constant_fit)},
                                {"tail_exponent", jnum(est.tail_exponent)},
                                {"positive", est.positive}});
                for (const auto& f : est.factors)
                    recs.push_back({{"record", "euler_factor"},
                                    {"p", f.p},
                                    {"depth", f.depth},
                                    {"capped", f.capped},
                                    {"value", jnum(f.value)}});
                auto cert = certify_positivity(cfg.system, cfg.p_cut);
                recs.push_back({{"record", "certificate"}, {"verdict", cert.verdict}, {"note", cert.note}});
                return 0;
            });
        } else if (*integral_cmd) {
            auto cfg = load_config(g);
            stage("integral", [&] {
                singular_integral_options io;
                io.method = pick_integral_method(cfg.system);
                io.seed = cfg.seed;
                auto est = singular_integral_normalized(cfg.system, cfg.gamma_cut, io);
                for (const auto& pt : est.ladder)
                    recs.push_back({{"record", "ladder"},
                                    {"gamma_cut", jnum(pt.gamma_cut)},
                                    {"estimate", jnum(pt.estimate)},
                                    {"error", jnum(pt.error)}});
                recs.push_back({{"record", "c_J"},
                                {"gamma_cut", jnum(cfg.gamma_cut)},
                                {"estimate", jnum(est.value)},
                                {"error", jnum(est.error)},
                                {"partial", est.partial},
                                {"note", est.note}});
                return 0;
            });
        } else if (*mv_cmd) {
            stage("meanvalue", [&] {
                std::vector<mean_value_record> rs;
                for (u64 P : mv_P) rs.push_back(count_J(mv_ell, mv_k, P));
                std::optional<slope_record> fit;
                if (rs.size() >= 4) fit = exponent_fit(rs);
                for (const auto& r : rs) {
                    json j = {{"ell", r.ell}, {"k", r.k}, {"P", r.P}, {"count", to_string_u128(r.count)}};
                    if (fit) j["log_slope"] = jnum(fit->slope);
                    recs.push_back(j);
                }
                return 0;
            });
        } else if (*count_cmd) {
            auto cfg = load_config(g);
            stage("counts", [&] {
                for (u64 P : cfg.P_ladder) {
                    prime_table table(P);
                    auto c = brute_force_R(cfg.system, table);
                    recs.push_back({{"digest", c.digest},
                                    {"P", c.P},
                                    {"unweighted", to_string_u128(c.unweighted)},
                                    {"weighted", jnum(c.weighted)},
                                    {"diagonal_unweighted", to_string_u128(c.diagonal_unweighted)},
                                    {"diagonal_weighted", jnum(c.diagonal_weighted)}});
                }
                return 0;
            });
        } else if (*predict_cmd) {
            auto cfg = load_config(g);
            stage("predict", [&] {
                for (u64 P : cfg.P_ladder) {
                    auto p = predict_main_term(cfg.system, P, cfg.q_cut, cfg.gamma_cut, cfg.p_cut, cfg.seed);
                    recs.push_back({{"P", p.P},
                                    {"S", jnum(p.S)},
                                    {"S_uncertainty", jnum(p.S_uncertainty)},
                                    {"c_J", jnum(p.c_J)},
                                    {"c_J_uncertainty", jnum(p.c_J_uncertainty)},
                                    {"exponent", p.exponent},
                                    {"value", jnum(p.value)},
                                    {"value_uncertainty", jnum(p.value_uncertainty)},
                                    {"note", p.note}});
                }
                return 0;
            });
        } else if (*run_cmd) {
            auto cfg = load_config(g);
            run_options ro;
            ro.threads = g.threads;
            auto rep = run_experiment(cfg, ro);
            auto doc = emit_report(rep, g.format == "csv" ? report_format::csv : report_format::jsonl, g.out);
            if (g.out.empty()) std::cout << doc;
            if (rep.any_failed()) {
                for (const auto& s : rep.stages)
                    if (s.status == "failed") std::cerr << "stage " << s.name << " failed: " << s.reason << '\n';
                return exit_stage;
            }
            return exit_ok;
        }
        write_out(g, render_records(recs, g.format));
        return exit_ok;
    } catch (const config_failure& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const stage_failure& e) {
        std::cerr << "stage " << e.stage << " failed: " << e.what() << '\n';
        return exit_stage;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return exit_stage;
    }
}
