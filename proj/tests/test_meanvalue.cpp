#include <gtest/gtest.h>

#include <map>

#include "hlm/meanvalue.hpp"

using namespace hlm;

namespace {

// All ell-tuples in [1,P]^ell, power sums per exponent.
std::vector<std::vector<u64>> power_sum_vectors(unsigned ell, const std::vector<unsigned>& k, u64 P) {
    std::vector<std::vector<u64>> out;
    std::vector<u64> x(ell, 1);
    while (true) {
        std::vector<u64> v(k.size(), 0);
        for (std::size_t j = 0; j < k.size(); ++j)
            for (u64 xi : x) {
                u64 p = 1;
                for (unsigned e = 0; e < k[j]; ++e) p *= xi;
                v[j] += p;
            }
        out.push_back(v);
        std::size_t i = 0;
        while (i < ell && x[i] == P) x[i++] = 1;
        if (i == ell) break;
        ++x[i];
    }
    return out;
}

// Pairs (x, y) with equal power sums, by direct comparison.
u64 naive_J_pairs(unsigned ell, const std::vector<unsigned>& k, u64 P) {
    auto v = power_sum_vectors(ell, k, P);
    u64 n = 0;
    for (const auto& a : v)
        for (const auto& b : v) n += (a == b);
    return n;
}

u64 naive_J_map(unsigned ell, const std::vector<unsigned>& k, u64 P) {
    std::map<std::vector<u64>, u64> m;
    for (auto& v : power_sum_vectors(ell, k, P)) ++m[v];
    u64 n = 0;
    for (auto& [_, c] : m) n += c * c;
    return n;
}

} // namespace

TEST(MeanValue, SingleVariable) {
    for (u64 P : {1, 2, 17, 500})
        for (std::vector<unsigned> k : {std::vector<unsigned>{1}, {3}, {1, 2, 3}}) {
            auto r = count_J(1, k, P);
            EXPECT_EQ(r.count, u128(P));
            EXPECT_EQ(r.mass, u128(P));
        }
}

TEST(MeanValue, QuadraticPairsAreDiagonal) {
    for (u64 P : {1, 2, 5, 40, 100}) EXPECT_EQ(count_J(2, {1, 2}, P).count, u128(2 * P * P - P)) << P;
}

TEST(MeanValue, LinearPairsMatchDoubleLoop) {
    EXPECT_EQ(count_J(2, {1}, 10).count, u128(naive_J_pairs(2, {1}, 10)));
    // sum_{s=2}^{2P} r(s)^2 with r(s) = min(s-1, 2P+1-s)
    u64 P = 10, want = 0;
    for (u64 s = 2; s <= 2 * P; ++s) {
        u64 r = std::min(s - 1, 2 * P + 1 - s);
        want += r * r;
    }
    EXPECT_EQ(count_J(2, {1}, P).count, u128(want));
}

TEST(MeanValue, MatchesNaive) {
    for (u64 P : {1, 3, 7, 12}) {
        EXPECT_EQ(count_J(3, {1, 2}, P).count, u128(naive_J_pairs(3, {1, 2}, P))) << P;
        EXPECT_EQ(count_J(2, {2}, P).count, u128(naive_J_pairs(2, {2}, P))) << P;
    }
    for (u64 P : {20, 30}) {
        EXPECT_EQ(count_J(2, {3}, P).count, u128(naive_J_map(2, {3}, P))) << P;
        EXPECT_EQ(count_J(3, {1}, P).count, u128(naive_J_map(3, {1}, P))) << P;
        EXPECT_EQ(count_J(3, {1, 2, 3}, P).count, u128(naive_J_map(3, {1, 2, 3}, P))) << P;
    }
}

TEST(MeanValue, SlopeFits) {
    auto ladder = [](unsigned ell, std::vector<unsigned> k, std::vector<u64> Ps) {
        std::vector<mean_value_record> recs;
        for (u64 P : Ps) recs.push_back(count_J(ell, k, P));
        return exponent_fit(recs);
    };
    auto s1 = ladder(1, {1}, {50, 100, 200, 400});
    EXPECT_NEAR(s1.slope, 1.0, 0.05);
    auto s2 = ladder(2, {1, 2}, {50, 100, 200, 400});
    EXPECT_NEAR(s2.slope, 2.0, 0.1);
    EXPECT_EQ(s2.predicted, 2.0);
    auto s3 = ladder(3, {1, 2, 3}, {25, 50, 100, 200});
    EXPECT_NEAR(s3.slope, 3.0, 0.3);
    EXPECT_NEAR(s3.gap, s3.slope - 3.0, 1e-12);
}

TEST(MeanValue, Errors) {
    EXPECT_THROW(count_J(0, {1}, 10), domain_error);
    EXPECT_THROW(count_J(2, {}, 10), domain_error);
    EXPECT_THROW(count_J(2, {1}, 0), domain_error);
    EXPECT_THROW(count_J(4, {1}, 1000, {1e3}), capacity_error);
    std::vector<mean_value_record> few(3, count_J(1, {1}, 5));
    EXPECT_THROW(exponent_fit(few), domain_error);
}

TEST(MeanValue, Csv) {
    std::vector<mean_value_record> recs{count_J(2, {1, 2}, 10)};
    auto csv = to_csv(recs);
    EXPECT_EQ(csv, "ell,k,P,count,log_slope\n2,\"1 2\",10,190,\n");
}
