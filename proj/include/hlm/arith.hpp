#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "hlm/error.hpp"

namespace hlm {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

// Compensated (Neumaier) accumulator. Summation order is the call order, so
// results are reproducible for a fixed enumeration.
template <class T>
class neumaier_sum {
public:
    void add(T x) noexcept {
        T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    neumaier_sum& operator+=(T x) noexcept {
        add(x);
        return *this;
    }
    T value() const noexcept { return sum_ + comp_; }

private:
    T sum_{};
    T comp_{};
};

inline std::string to_string_u128(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return {s.rbegin(), s.rend()};
}

inline std::string to_string_i128(i128 v) {
    return v < 0 ? "-" + to_string_u128(static_cast<u128>(-(v + 1)) + 1) : to_string_u128(static_cast<u128>(v));
}

inline u64 mulmod(u64 a, u64 b, u64 m) noexcept {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 powmod(u64 base, u64 exp, u64 m) noexcept {
    if (m == 1) return 0;
    u64 result = 1;
    base %= m;
    while (exp) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

// Least non-negative residue of a (possibly negative) integer.
inline u64 mod_floor(i128 a, u64 m) noexcept {
    i128 r = a % static_cast<i128>(m);
    if (r < 0) r += m;
    return static_cast<u64>(r);
}

inline u64 lcm_checked(u64 a, u64 b) {
    if (a == 0 || b == 0) return 0;
    u64 g = std::gcd(a, b);
    u128 l = static_cast<u128>(a / g) * b;
    if (l > static_cast<u128>(UINT64_MAX)) throw capacity_error("lcm exceeds 64-bit range");
    return static_cast<u64>(l);
}

// Integer power with overflow detection against the i128 range.
inline i128 ipow_checked(i128 base, unsigned exp) {
    constexpr i128 kLimit = static_cast<i128>(1) << 125;
    i128 r = 1;
    for (unsigned i = 0; i < exp; ++i) {
        if ((base >= 0 ? base : -base) != 0 && (r >= 0 ? r : -r) > kLimit / (base >= 0 ? base : -base))
            throw capacity_error("integer power exceeds 128-bit range");
        r *= base;
    }
    return r;
}

inline u64 ipow_u64(u64 base, unsigned exp) {
    u128 r = 1;
    for (unsigned i = 0; i < exp; ++i) {
        r *= base;
        if (r > UINT64_MAX) throw capacity_error("integer power exceeds 64-bit range");
    }
    return static_cast<u64>(r);
}

// Deterministic Miller-Rabin. The first thirteen primes as witnesses are
// exact for every n < 3.3e24, which covers all of u64.
inline bool is_prime(u64 n) noexcept {
    if (n < 2) return false;
    static constexpr u64 kWitnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
    for (u64 p : kWitnesses) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u64 d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (u64 a : kWitnesses) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

struct prime_power {
    u64 prime;
    unsigned exponent;

    friend bool operator==(const prime_power&, const prime_power&) = default;
};

// Pairs (prime, exponent) with strictly increasing primes.
class factorization {
public:
    factorization() = default;
    explicit factorization(std::vector<prime_power> f) : factors_(std::move(f)) {}

    const std::vector<prime_power>& factors() const noexcept { return factors_; }
    std::size_t size() const noexcept { return factors_.size(); }
    bool empty() const noexcept { return factors_.empty(); }
    auto begin() const noexcept { return factors_.begin(); }
    auto end() const noexcept { return factors_.end(); }

    u64 value() const {
        u64 n = 1;
        for (auto [p, e] : factors_) n *= ipow_u64(p, e);
        return n;
    }
    u64 totient() const {
        u64 phi = 1;
        for (auto [p, e] : factors_) phi *= ipow_u64(p, e - 1) * (p - 1);
        return phi;
    }
    int moebius() const noexcept {
        for (auto f : factors_)
            if (f.exponent > 1) return 0;
        return (factors_.size() % 2) ? -1 : 1;
    }
    // All divisors in increasing order.
    std::vector<u64> divisors() const {
        std::vector<u64> d{1};
        for (auto [p, e] : factors_) {
            std::size_t n = d.size();
            u64 pk = 1;
            for (unsigned k = 1; k <= e; ++k) {
                pk *= p;
                for (std::size_t i = 0; i < n; ++i) d.push_back(d[i] * pk);
            }
        }
        std::sort(d.begin(), d.end());
        return d;
    }

    friend bool operator==(const factorization&, const factorization&) = default;

private:
    std::vector<prime_power> factors_;
};

inline factorization factorize(u64 n) {
    if (n == 0) throw domain_error("factorize: n must be positive");
    std::vector<prime_power> f;
    auto strip = [&](u64 p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) f.push_back({p, e});
    };
    strip(2);
    strip(3);
    for (u64 p = 5; p <= n / p; p += 6) {
        strip(p);
        strip(p + 2);
    }
    if (n > 1) f.push_back({n, 1});
    return factorization(std::move(f));
}

inline u64 euler_phi(u64 n) { return factorize(n).totient(); }
inline int moebius(u64 n) { return factorize(n).moebius(); }

// True iff (Z/q)^* is cyclic: q in {1, 2, 4, p^e, 2p^e} with p odd.
inline bool has_primitive_root(u64 q) {
    if (q == 0) return false;
    if (q <= 4) return true;
    if (q % 4 == 0) return false;
    if (q % 2 == 0) q /= 2;
    return factorize(q).size() == 1;
}

inline u64 multiplicative_order(u64 g, u64 q) {
    if (q == 1) return 1;
    if (std::gcd(g, q) != 1) throw domain_error("multiplicative_order: g not a unit");
    u64 ord = euler_phi(q);
    for (auto [r, e] : factorize(ord)) {
        (void)e;
        while (ord % r == 0 && powmod(g, ord / r, q) == 1) ord /= r;
    }
    return ord;
}

// Smallest positive generator of (Z/q)^*.
inline u64 primitive_root(u64 q) {
    if (q == 0) throw domain_error("primitive_root: q must be positive");
    if (!has_primitive_root(q))
        throw structure_error("primitive_root: (Z/" + std::to_string(q) +
                              ")^* is not cyclic; decompose by CRT into prime-power components");
    if (q <= 2) return 1;
    if (q == 4) return 3;
    u64 phi = euler_phi(q);
    auto fac = factorize(phi);
    for (u64 g = 2; g < q; ++g) {
        if (std::gcd(g, q) != 1) continue;
        bool generator = true;
        for (auto [r, e] : fac) {
            (void)e;
            if (powmod(g, phi / r, q) == 1) {
                generator = false;
                break;
            }
        }
        if (generator) return g;
    }
    throw structure_error("primitive_root: no generator found");
}

// Sieve products up to a limit P: primes, von Mangoldt, Moebius and Euler phi.
// Immutable after construction.
class prime_table {
public:
    struct options {
        std::size_t block_size = std::size_t{1} << 20;
        std::size_t memory_budget_bytes = std::size_t{1} << 31;
    };

    prime_table() : prime_table(1) {}
    explicit prime_table(u64 limit) : prime_table(limit, options{}) {}
    prime_table(u64 limit, options opt);

    u64 limit() const noexcept { return limit_; }
    const std::vector<u64>& primes() const noexcept { return primes_; }
    std::size_t prime_count() const noexcept { return primes_.size(); }

    double lambda(u64 n) const { return lambda_.at(n); }
    int mu(u64 n) const { return mu_.at(n); }
    u64 phi(u64 n) const { return phi_.at(n); }
    bool is_prime(u64 n) const noexcept {
        return n <= limit_ && n >= 2 && lambda_[n] > 0 && std::binary_search(primes_.begin(), primes_.end(), n);
    }

    const std::vector<double>& lambda_values() const noexcept { return lambda_; }
    const std::vector<signed char>& mu_values() const noexcept { return mu_; }

    // Chebyshev theta(P) = sum_{p <= P} log p.
    double theta() const noexcept { return theta_; }
    // Chebyshev psi(x) = sum_{n <= x} Lambda(n), for x <= P.
    double psi(u64 x) const {
        if (x > limit_) throw domain_error("psi: argument beyond table limit");
        neumaier_sum<double> s;
        for (u64 n = 2; n <= x; ++n) s += lambda_[n];
        return s.value();
    }

private:
    u64 limit_ = 0;
    std::vector<u64> primes_;
    std::vector<double> lambda_;
    std::vector<signed char> mu_;
    std::vector<std::uint32_t> phi_;
    double theta_ = 0.0;
};

inline prime_table::prime_table(u64 limit, options opt) : limit_(limit) {
    if (limit == 0) throw capacity_error("build_prime_table: P must be at least 1");
    if (limit > 1'000'000'000ULL) throw capacity_error("build_prime_table: P exceeds 1e9");
    const std::size_t bytes_per_entry = sizeof(double) + sizeof(signed char) + sizeof(std::uint32_t);
    if (static_cast<u128>(limit + 1) * bytes_per_entry > opt.memory_budget_bytes)
        throw capacity_error("build_prime_table: P=" + std::to_string(limit) + " exceeds memory budget");
    if (opt.block_size == 0) opt.block_size = 1;

    lambda_.assign(limit + 1, 0.0);
    mu_.assign(limit + 1, 0);
    phi_.assign(limit + 1, 0);
    mu_[1] = 1;
    phi_[1] = 1;

    // Base primes up to sqrt(P) by a plain sieve.
    u64 root = static_cast<u64>(std::sqrt(static_cast<double>(limit)));
    while ((root + 1) * (root + 1) <= limit) ++root;
    while (root * root > limit) --root;
    std::vector<u64> base;
    {
        std::vector<bool> composite(root + 1, false);
        for (u64 i = 2; i <= root; ++i) {
            if (composite[i]) continue;
            base.push_back(i);
            for (u64 j = i * i; j <= root; j += i) composite[j] = true;
        }
    }

    // Segmented multiplicative sieve: each block divides out base primes and
    // leaves at most one prime factor above sqrt(P) in the cofactor.
    std::vector<u64> rem;
    std::vector<u64> spf;
    std::vector<bool> multi;
    std::vector<std::uint32_t> phi_blk;
    std::vector<signed char> mu_blk;
    for (u64 lo = 2; lo <= limit; lo += opt.block_size) {
        u64 hi = std::min<u64>(limit + 1, lo + opt.block_size);
        std::size_t len = hi - lo;
        rem.resize(len);
        spf.assign(len, 0);
        multi.assign(len, false);
        phi_blk.assign(len, 1);
        mu_blk.assign(len, 1);
        for (std::size_t i = 0; i < len; ++i) rem[i] = lo + i;
        for (u64 p : base) {
            u64 start = ((lo + p - 1) / p) * p;
            for (u64 m = start; m < hi; m += p) {
                std::size_t i = m - lo;
                unsigned e = 0;
                while (rem[i] % p == 0) {
                    rem[i] /= p;
                    ++e;
                }
                phi_blk[i] *= static_cast<std::uint32_t>(ipow_u64(p, e - 1) * (p - 1));
                mu_blk[i] = (e > 1) ? 0 : static_cast<signed char>(-mu_blk[i]);
                if (spf[i] == 0)
                    spf[i] = p;
                else
                    multi[i] = true;
            }
        }
        for (std::size_t i = 0; i < len; ++i) {
            u64 n = lo + i;
            if (rem[i] > 1) {
                u64 p = rem[i];
                phi_blk[i] *= static_cast<std::uint32_t>(p - 1);
                mu_blk[i] = static_cast<signed char>(-mu_blk[i]);
                if (spf[i] == 0) {
                    lambda_[n] = std::log(static_cast<double>(p));
                    primes_.push_back(n);
                } else {
                    multi[i] = true;
                }
            } else if (!multi[i]) {
                lambda_[n] = std::log(static_cast<double>(spf[i]));
                if (spf[i] == n) primes_.push_back(n);
            }
            phi_[n] = phi_blk[i];
            mu_[n] = mu_blk[i];
        }
    }

    neumaier_sum<double> th;
    for (u64 p : primes_) th += std::log(static_cast<double>(p));
    theta_ = th.value();
}

inline prime_table build_prime_table(u64 limit) { return prime_table(limit); }

} // namespace hlm
