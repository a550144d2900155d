#pragma once
// Small independent reference implementations shared by the tests. They use
// trial division and direct loops only.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline double von_mangoldt(std::uint64_t n) {
    if (n < 2) return 0.0;
    for (std::uint64_t p = 2; p <= n; ++p) {
        if (n % p) continue;
        std::uint64_t m = n;
        while (m % p == 0) m /= p;
        return m == 1 ? std::log(static_cast<double>(p)) : 0.0;
    }
    return 0.0;
}

inline int moebius(std::uint64_t n) {
    int r = 1;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        n /= p;
        if (n % p == 0) return 0;
        r = -r;
    }
    if (n > 1) r = -r;
    return r;
}

inline std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
    while (b) {
        auto t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline std::uint64_t phi(std::uint64_t n) {
    std::uint64_t c = 0;
    for (std::uint64_t r = 1; r <= n; ++r) c += gcd(r, n) == 1;
    return c;
}

// e(x) with the argument reduced in long double first.
inline cplx e(long double x) {
    x -= std::floor(x);
    return std::polar(1.0, static_cast<double>(2.0L * std::numbers::pi_v<long double> * x));
}

inline std::vector<std::uint64_t> primes_upto(std::uint64_t P) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t n = 2; n <= P; ++n)
        if (is_prime(n)) out.push_back(n);
    return out;
}

} // namespace oracle
