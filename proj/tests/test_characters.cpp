#include <gtest/gtest.h>

#include <cmath>

#include "hlm/characters.hpp"
#include "oracle.hpp"

using namespace hlm;

TEST(Characters, TrivialModulus) {
    auto cs = characters(1);
    ASSERT_EQ(cs.size(), 1u);
    for (i64 n : {0, 1, 5, -7}) EXPECT_EQ(cs[0](n), cplx(1, 0));
}

TEST(Characters, ModFive) {
    auto cs = characters(5);
    ASSERT_EQ(cs.size(), 4u);
    std::vector<cplx> at2;
    for (const auto& c : cs) at2.push_back(c(2));
    for (int j = 0; j < 4; ++j) {
        cplx root = std::polar(1.0, 2 * std::numbers::pi * j / 4);
        int hits = 0;
        for (auto z : at2) hits += std::abs(z - root) < 1e-12;
        EXPECT_EQ(hits, 1);
    }
}

TEST(Characters, ModEightIsReal) {
    auto cs = characters(8);
    ASSERT_EQ(cs.size(), 4u);
    for (const auto& c : cs)
        for (i64 n = 0; n < 8; ++n) {
            cplx z = c(n);
            EXPECT_NEAR(z.imag(), 0.0, 1e-12);
            double r = z.real();
            EXPECT_TRUE(std::abs(r) < 1e-12 || std::abs(r - 1) < 1e-12 || std::abs(r + 1) < 1e-12);
        }
}

TEST(Characters, MultiplicativeAndPeriodic) {
    for (u64 q : {12ULL, 15ULL, 16ULL, 63ULL}) {
        for (const auto& c : characters(q))
            for (i64 a = 0; a < (i64)q; ++a)
                for (i64 b = 0; b < (i64)q; ++b) {
                    ASSERT_NEAR(std::abs(c(a * b) - c(a) * c(b)), 0.0, 1e-12);
                    ASSERT_NEAR(std::abs(c(a + (i64)q) - c(a)), 0.0, 1e-12);
                }
    }
}

TEST(Characters, OrthogonalityBothWays) {
    for (u64 q = 1; q <= 40; ++q) {
        auto cs = characters(q);
        const double phi = double(oracle::phi(q));
        ASSERT_EQ(cs.size(), static_cast<std::size_t>(phi));
        // sum over a
        for (std::size_t i = 0; i < cs.size(); ++i)
            for (std::size_t j = 0; j < cs.size(); ++j) {
                cplx s = 0;
                for (i64 a = 0; a < (i64)q; ++a) s += cs[i](a) * std::conj(cs[j](a));
                ASSERT_NEAR(std::abs(s - cplx(i == j ? phi : 0.0, 0)), 0.0, 1e-10) << q;
            }
        // sum over chi
        for (i64 a = 0; a < (i64)q; ++a)
            for (i64 b = 0; b < (i64)q; ++b) {
                cplx s = 0;
                for (const auto& c : cs) s += c(a) * std::conj(c(b));
                bool hit = a == b && oracle::gcd(a, q) == 1;
                if (q == 1) hit = true;
                ASSERT_NEAR(std::abs(s - cplx(hit ? phi : 0.0, 0)), 0.0, 1e-10) << q;
            }
    }
}

TEST(Characters, ConjugateAndPrincipal) {
    auto cs = characters(21);
    EXPECT_TRUE(cs.front().is_principal());
    for (const auto& c : cs) {
        auto d = c.conj();
        for (i64 n = 0; n < 21; ++n) EXPECT_NEAR(std::abs(d(n) - std::conj(c(n))), 0.0, 1e-12);
    }
    auto p = principal_character(21);
    for (i64 n = 0; n < 21; ++n) EXPECT_EQ(p(n), cplx(oracle::gcd(n, 21) == 1 ? 1.0 : 0.0, 0));
}
