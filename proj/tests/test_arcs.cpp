#include <gtest/gtest.h>

#include <cmath>

#include "hlm/arcs.hpp"
#include "oracle.hpp"

using namespace hlm;

TEST(Convergents, ExactThird) {
    auto cs = cf_convergents(rational_coord{1, 3}, 10);
    ASSERT_FALSE(cs.empty());
    EXPECT_EQ(cs.back(), (convergent{1, 3}));
    auto r = simultaneous_approx(alpha_point::from_rationals({{1, 3}}), 1e6, 0.5);
    EXPECT_EQ(r.q, 3u);
    EXPECT_EQ(r.err[0], 0.0);
}

TEST(Convergents, NearThird) {
    auto cs = cf_convergents(0.3333, 100);
    ASSERT_FALSE(cs.empty());
    EXPECT_EQ(cs.back(), (convergent{1, 3}));
}

TEST(Convergents, GoldenRatioFibonacci) {
    double x = (1 + std::sqrt(5.0)) / 2 - 1;
    std::vector<u64> qs;
    for (auto c : cf_convergents(x, 20)) qs.push_back(c.q);
    EXPECT_EQ(qs, (std::vector<u64>{1, 2, 3, 5, 8, 13}));
}

TEST(Convergents, AreBestApproximations) {
    // Each convergent beats every fraction with a smaller denominator.
    for (double x : {0.4142135623730951, 0.1415926535897932, 0.7182818284590452}) {
        for (auto c : cf_convergents(x, 400)) {
            double err = std::abs(x - double(c.a) / double(c.q));
            for (u64 q = 1; q < c.q; ++q) {
                double best = std::abs(x - std::round(x * q) / q);
                ASSERT_GE(best + 1e-15, err) << x << " " << c.q << " vs " << q;
            }
        }
    }
}

TEST(SimultaneousApprox, LcmCombine) {
    auto r = simultaneous_approx(alpha_point::from_rationals({{1, 2}, {1, 3}}), 1e8, 0.5);
    EXPECT_EQ(r.q, 6u);
    EXPECT_EQ(r.a, (std::vector<i64>{3, 2}));
    EXPECT_EQ(r.err, (std::vector<double>{0.0, 0.0}));
}

TEST(SimultaneousApprox, SingleCoordinateIsBestConvergent) {
    double x = 0.2718281828459045;
    const double P = 1e6, delta = 0.3;
    auto r = simultaneous_approx(alpha_point::from_reals({x}), P, delta);
    auto cs = cf_convergents(x, static_cast<u64>(std::floor(std::pow(P, delta))));
    EXPECT_EQ(r.q, cs.back().q);
    EXPECT_EQ(r.a[0], cs.back().a);
}

TEST(SimultaneousApprox, RationalTimesIrrational) {
    double g = (std::sqrt(5.0) - 1) / 2;
    // Q = 1e4, per-coordinate bound Q^{1/2} = 100
    auto r = simultaneous_approx(alpha_point::from_reals({0.2, g}), 1e8, 0.5);
    u64 qg = cf_convergents(g, 100).back().q;
    EXPECT_EQ(qg, 89u);
    EXPECT_EQ(r.q, 5 * qg / oracle::gcd(5, qg));
    EXPECT_NEAR(r.err[0], 0.0, 1e-15);
}

TEST(Classify, CentreIsMajor) {
    std::vector<unsigned> k{1};
    auto lab = classify(alpha_point::from_rationals({{2, 7}}), 1e4, 0.25, k);
    EXPECT_EQ(lab.kind, arc_kind::major);
    ASSERT_TRUE(lab.approx);
    EXPECT_EQ(lab.approx->q, 7u);
    EXPECT_EQ(lab.approx->a[0], 2);
    EXPECT_EQ(lab.approx->err[0], 0.0);
    EXPECT_EQ(lab.zone, arc_zone::inner);
}

TEST(Classify, WidthViolation) {
    // alpha = 1/2 + 2Q/(2 P): outside the q=2 arc by a factor 2.
    const double P = 1e4, delta = 0.25, Q = std::pow(P, delta);
    std::vector<unsigned> k{1};
    double a = 0.5 + 2 * Q / (2 * P);
    auto lab = classify(alpha_point::from_reals({a}), P, delta, k);
    if (lab.kind == arc_kind::major) {
        ASSERT_TRUE(lab.approx);
        EXPECT_NE(lab.approx->q, 2u);
    }
    // brute check of every q <= Q
    bool any = false;
    for (u64 q = 1; q <= (u64)std::floor(Q); ++q) {
        double e = std::abs(a - std::round(a * q) / q);
        any = any || e <= Q / (q * P);
    }
    EXPECT_EQ(any, lab.kind == arc_kind::major);
    // and just inside is Major with q = 2
    auto in = classify(alpha_point::from_reals({0.5 + 0.9 * Q / (2 * P)}), P, delta, k);
    EXPECT_EQ(in.kind, arc_kind::major);
}

TEST(Classify, GoldenIsMinor) {
    double g = (std::sqrt(5.0) - 1) / 2;
    std::vector<unsigned> k{1, 2};
    EXPECT_EQ(classify(alpha_point::from_reals({g, g}), 1e4, 0.1, k).kind, arc_kind::minor);
    std::vector<unsigned> k1{1};
    EXPECT_EQ(classify(alpha_point::from_reals({g}), 1e4, 0.1, k1).kind, arc_kind::minor);
}

TEST(Classify, Errors) {
    std::vector<unsigned> k{1};
    EXPECT_THROW(classify(alpha_point::from_reals({0.1}), 1e4, 0.0, k), domain_error);
    EXPECT_THROW(classify(alpha_point::from_reals({0.1}), 1e12, 0.9, k), capacity_error);
}

TEST(DecayScan, DeterministicAndMinorOnly) {
    auto sys = make_system({1, 1, -1, -1}, 1);
    auto a = minor_decay_scan(sys, {1000, 3000}, 20, 77);
    auto b = minor_decay_scan(sys, {1000, 3000}, 20, 77);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].median, b[i].median);
        EXPECT_EQ(a[i].sup, b[i].sup);
        EXPECT_EQ(a[i].minor_samples, 20u);
        EXPECT_LE(a[i].sup, 1.0 + 1e-12);
        EXPECT_LE(a[i].median, a[i].sup);
    }
}

TEST(DecayScan, MajorSamplesDiscarded) {
    // With delta close to 1 almost every draw is major.
    auto sys = make_system({1, -1}, 1);
    decay_options opt;
    opt.delta = 0.6;
    opt.max_draw_factor = 2;
    EXPECT_THROW(minor_decay_scan(sys, {1000}, 10, 1, opt), domain_error);
}
