#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hlm/pipeline.hpp"

using namespace hlm;

namespace {

const char* small_four = R"({
  "u": [[1], [1], [-1], [-1]], "k": [1], "P": 1000, "P_ladder": [250, 500, 1000],
  "q_cut": 100, "gamma_cut": 20, "p_cut": 30, "seed": 3
})";

const char* small_squares = R"({
  "u": [[1], [1]], "k": [2], "P": 400, "P_ladder": [100, 400],
  "q_cut": 60, "gamma_cut": 8, "p_cut": 20, "seed": 1
})";

const experiment_report& four_report() {
    static const experiment_report r = run_experiment(parse_config(std::string(small_four)));
    return r;
}

} // namespace

TEST(Prediction, Homogeneous) {
    auto sys = make_system({1, 1, -1, -1}, 1);
    auto a = predict_main_term(sys, 1000, 100, 10, 30);
    auto b = predict_main_term(sys, 2000, 100, 10, 30);
    ASSERT_TRUE(a.main_term);
    EXPECT_EQ(a.exponent, 3);
    EXPECT_EQ(b.value, a.value * 8.0);
    EXPECT_EQ(a.value, (a.S * a.c_J) * 1e9);
}

TEST(Prediction, ObstructedIsZero) {
    auto p = predict_main_term(make_system({1, 1}, 2), 1000, 60, 8, 20);
    EXPECT_FALSE(p.main_term);
    EXPECT_EQ(p.value, 0.0);
    EXPECT_EQ(p.S, 0.0);
    EXPECT_NE(p.note.find("no main term"), std::string::npos);
}

TEST(Pipeline, DefaultDiagonalExclusion) {
    EXPECT_FALSE(default_exclude_diagonal(make_system({1, 1, -1, -1}, 1)));
    EXPECT_TRUE(default_exclude_diagonal(make_system({1, -1}, 1)));
    EXPECT_FALSE(default_exclude_diagonal(make_system({1, 1}, 2)));
}

TEST(Pipeline, FourPrimesSmall) {
    const auto& r = four_report();
    EXPECT_FALSE(r.any_failed());
    for (const char* s : {"local", "real-probe", "series", "integral", "predict", "counts", "ratios"}) {
        ASSERT_NE(r.stage(s), nullptr) << s;
        EXPECT_EQ(r.stage(s)->status, "ok") << s;
    }
    ASSERT_EQ(r.counts.size(), 3u);
    ASSERT_EQ(r.ratios.size(), 3u);
    EXPECT_EQ(r.predictions.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& q = r.ratios[i];
        EXPECT_EQ(q.basis, "weighted");
        EXPECT_EQ(q.empirical, r.counts[i].weighted);
        EXPECT_EQ(q.ratio, q.empirical / q.predicted);
        EXPECT_GT(q.ratio, 0.5);
        EXPECT_LT(q.ratio, 1.2);
    }
    // ratio creeps toward 1 as P grows
    EXPECT_LT(r.ratios[0].ratio, r.ratios[2].ratio);
    ASSERT_TRUE(r.series.has_value());
    EXPECT_EQ(r.series->certificate, "positive");
    EXPECT_EQ(r.threads_used, 1);
}

TEST(Pipeline, Deterministic) {
    auto again = run_experiment(parse_config(std::string(small_four)));
    EXPECT_TRUE(without_timing(again) == without_timing(four_report()));
    EXPECT_EQ(report_digest(again), report_digest(four_report()));
}

TEST(Pipeline, JsonlRoundTrip) {
    const auto& r = four_report();
    auto text = to_jsonl(r);
    auto back = from_jsonl(text);
    EXPECT_TRUE(back == r);
    EXPECT_EQ(to_jsonl(back), text);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        EXPECT_TRUE(j.contains("record"));
    }
}

TEST(Pipeline, CsvRowsPerMetric) {
    auto csv = to_csv(four_report());
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "section,P,metric,value");
    for (u64 P : {250, 500, 1000})
        for (const char* m : {"counts,%,weighted,", "ratios,%,ratio,", "predict,%,value,"}) {
            std::string key(m);
            key.replace(key.find('%'), 1, std::to_string(P));
            EXPECT_NE(csv.find("\n" + key), std::string::npos) << key;
        }
}

TEST(Pipeline, ObstructedSkipsRatios) {
    auto r = run_experiment(parse_config(std::string(small_squares)));
    EXPECT_FALSE(r.any_failed());
    ASSERT_TRUE(r.series.has_value());
    ASSERT_TRUE(r.series->obstruction.has_value());
    EXPECT_EQ(*r.series->obstruction, 3u);
    EXPECT_EQ(r.series->euler_product, 0.0);
    for (const auto& p : r.predictions) EXPECT_EQ(p.value, 0.0);
    for (const auto& c : r.counts) EXPECT_EQ(c.unweighted, u128(0));
    ASSERT_NE(r.stage("ratios"), nullptr);
    EXPECT_EQ(r.stage("ratios")->status, "skipped");
    EXPECT_FALSE(r.stage("ratios")->reason.empty());
    ASSERT_TRUE(r.probe.has_value());
    EXPECT_FALSE(r.probe->point.has_value());
    EXPECT_TRUE(from_jsonl(to_jsonl(r)) == r);
}

TEST(Pipeline, CapacityDegradesToSkipped) {
    run_options o;
    o.counts.budget = 10;
    auto r = run_experiment(parse_config(std::string(small_four)), o);
    EXPECT_EQ(r.stage("counts")->status, "skipped");
    EXPECT_FALSE(r.any_failed());
    EXPECT_TRUE(r.counts.empty());
}

TEST(Pipeline, JsonNonFinite) {
    EXPECT_EQ(detail::num(INFINITY), nlohmann::json("inf"));
    EXPECT_EQ(detail::num(-INFINITY), nlohmann::json("-inf"));
    EXPECT_TRUE(std::isnan(detail::num(nlohmann::json("nan"))));
    EXPECT_EQ(detail::num(nlohmann::json(2.5)), 2.5);
}

TEST(Pipeline, EmitToBadPathThrows) {
    EXPECT_THROW(emit_report(four_report(), report_format::csv, "/nonexistent-dir/x.csv"), io_error);
}
