#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "hlm/arith.hpp"
#include "hlm/rng.hpp"

using namespace hlm;

namespace {

bool trial_prime(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// phi, mu, Lambda straight from trial division.
struct naive_mult {
    u64 phi;
    int mu;
    double lambda;
};
naive_mult naive(u64 n) {
    naive_mult r{n, 1, 0.0};
    u64 m = n;
    int distinct = 0;
    u64 last = 0;
    for (u64 p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        int e = 0;
        while (m % p == 0) m /= p, ++e;
        r.phi = r.phi / p * (p - 1);
        if (e > 1) r.mu = 0;
        ++distinct;
        last = p;
    }
    if (m > 1) {
        r.phi = r.phi / m * (m - 1);
        ++distinct;
        last = m;
    }
    if (r.mu) r.mu = distinct % 2 ? -1 : 1;
    if (distinct == 1) r.lambda = std::log(static_cast<double>(last));
    return r;
}

} // namespace

TEST(PrimeTable, EmptyAtOne) {
    prime_table t(1);
    EXPECT_TRUE(t.primes().empty());
    EXPECT_EQ(t.theta(), 0.0);
}

TEST(PrimeTable, TenAndHundred) {
    prime_table t(10);
    EXPECT_EQ(t.primes(), (std::vector<u64>{2, 3, 5, 7}));
    EXPECT_NEAR(t.theta(), std::log(2.0) + std::log(3.0) + std::log(5.0) + std::log(7.0), 1e-14);
    prime_table h(100);
    u64 count = 0;
    for (u64 n = 1; n <= 100; ++n) count += trial_prime(n);
    EXPECT_EQ(h.prime_count(), count);
    EXPECT_EQ(h.prime_count(), 25u);
}

TEST(PrimeTable, ZeroRejected) { EXPECT_THROW(prime_table(0), capacity_error); }

TEST(PrimeTable, ListedPrimesVerify) {
    prime_table t(200'000);
    for (u64 p : t.primes()) ASSERT_TRUE(is_prime(p)) << p;
    u64 count = 0;
    for (u64 n = 2; n <= 200'000; ++n) count += is_prime(n);
    EXPECT_EQ(count, t.prime_count());
}

TEST(PrimeTable, DivisorSumIdentities) {
    const u64 N = 3000;
    prime_table t(N);
    for (u64 n = 1; n <= N; ++n) {
        u64 phis = 0;
        int mus = 0;
        for (u64 d = 1; d <= n; ++d)
            if (n % d == 0) phis += t.phi(d), mus += t.mu(d);
        ASSERT_EQ(phis, n);
        ASSERT_EQ(mus, n == 1 ? 1 : 0);
        ASSERT_EQ(t.lambda(n) != 0.0, naive(n).lambda != 0.0) << n;
    }
}

TEST(PrimeTable, RandomAgreesWithTrialDivision) {
    const u64 N = 1'000'000;
    prime_table t(N);
    rng g(11);
    for (int i = 0; i < 2000; ++i) {
        u64 n = 1 + g.below(N);
        auto r = naive(n);
        ASSERT_EQ(t.phi(n), r.phi) << n;
        ASSERT_EQ(t.mu(n), r.mu) << n;
        ASSERT_NEAR(t.lambda(n), r.lambda, 1e-12) << n;
        ASSERT_EQ(euler_phi(n), r.phi);
        ASSERT_EQ(moebius(n), r.mu);
    }
}

TEST(PrimeTable, ChebyshevScale) {
    for (u64 P : {10'000ULL, 100'000ULL, 1'000'000ULL}) {
        prime_table t(P);
        double r = t.theta() / static_cast<double>(P);
        EXPECT_GT(r, 0.8);
        EXPECT_LT(r, 1.2);
    }
}

TEST(PrimeTable, SegmentedMatchesSingleBlock) {
    prime_table::options small;
    small.block_size = 1000;
    prime_table a(50'000, small), b(50'000);
    EXPECT_EQ(a.primes(), b.primes());
    EXPECT_EQ(a.lambda_values(), b.lambda_values());
    EXPECT_EQ(a.mu_values(), b.mu_values());
    EXPECT_EQ(a.theta(), b.theta());
}

TEST(PrimeTable, Psi) {
    prime_table t(10);
    EXPECT_NEAR(t.psi(10), 3 * std::log(2.0) + 2 * std::log(3.0) + std::log(5.0) + std::log(7.0), 1e-13);
    EXPECT_THROW(t.psi(11), domain_error);
}

TEST(Factorize, Examples) {
    EXPECT_TRUE(factorize(1).empty());
    auto f = factorize(12);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f.factors()[0], (prime_power{2, 2}));
    EXPECT_EQ(f.factors()[1], (prime_power{3, 1}));
    auto g = factorize(97);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g.factors()[0], (prime_power{97, 1}));
    EXPECT_THROW(factorize(0), domain_error);
}

TEST(Factorize, Reconstructs) {
    rng g(5);
    for (int i = 0; i < 500; ++i) {
        u64 n = 1 + g.below(u64{1} << 40);
        auto f = factorize(n);
        u64 prev = 0;
        for (const auto& pp : f) {
            EXPECT_GT(pp.prime, prev);
            EXPECT_GE(pp.exponent, 1u);
            EXPECT_TRUE(is_prime(pp.prime));
            prev = pp.prime;
        }
        EXPECT_EQ(f.value(), n);
    }
}

TEST(Factorize, Divisors) {
    auto d = factorize(36).divisors();
    std::sort(d.begin(), d.end());
    EXPECT_EQ(d, (std::vector<u64>{1, 2, 3, 4, 6, 9, 12, 18, 36}));
}

TEST(PrimitiveRoot, Examples) {
    EXPECT_EQ(primitive_root(2), 1u);
    EXPECT_EQ(primitive_root(7), 3u);
    EXPECT_EQ(primitive_root(9), 2u);
    EXPECT_THROW(primitive_root(8), structure_error);
    EXPECT_THROW(primitive_root(15), structure_error);
}

TEST(PrimitiveRoot, HasFullOrder) {
    for (u64 q : {3ULL, 4ULL, 5ULL, 25ULL, 27ULL, 49ULL, 50ULL, 54ULL, 121ULL, 998ULL, 1009ULL}) {
        u64 g = primitive_root(q);
        // naive order
        u64 x = g % q, ord = 1;
        while (x != 1) x = x * g % q, ++ord;
        EXPECT_EQ(ord, euler_phi(q)) << q;
    }
}

TEST(IsPrime, LargeKnownValues) {
    EXPECT_TRUE(is_prime(1'000'000'007ULL));
    EXPECT_TRUE(is_prime(18446744073709551557ULL));  // largest 64-bit prime
    EXPECT_FALSE(is_prime(3215031751ULL));           // strong pseudoprime to 2,3,5,7
    EXPECT_FALSE(is_prime(1ULL));
}

TEST(Checked, Overflow) {
    EXPECT_THROW(ipow_checked(10, 40), capacity_error);
    EXPECT_EQ(ipow_checked(-3, 3), -27);
    EXPECT_THROW(lcm_checked(u64{1} << 40, (u64{1} << 40) - 1), capacity_error);
    EXPECT_EQ(lcm_checked(4, 6), 12u);
    EXPECT_EQ(mod_floor(-7, 5), 3u);
    EXPECT_EQ(to_string_u128(static_cast<u128>(1) << 100), "1267650600228229401496703205376");
    EXPECT_EQ(to_string_i128(-static_cast<i128>(12345)), "-12345");
}

TEST(Rng, DerivedSeedsReproducible) {
    rng a(derive_seed(9, 3)), b(derive_seed(9, 3)), c(derive_seed(9, 4));
    EXPECT_EQ(a.next(), b.next());
    EXPECT_NE(rng(derive_seed(9, 3)).next(), c.next());
}
