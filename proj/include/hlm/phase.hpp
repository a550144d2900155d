#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "hlm/arith.hpp"

namespace hlm {

using cplx = std::complex<double>;

// e(x) = exp(2 pi i x).
inline cplx unit_phase(double turns) noexcept {
    double f = turns - std::floor(turns);
    return std::polar(1.0, 2.0 * std::numbers::pi * f);
}

inline double frac(double x) noexcept {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

// frac(alpha * n) for alpha in [0,1) and an integer multiplier. The double
// alpha is an exact dyadic rational m / 2^E, so the product is reduced mod 1
// exactly in 192-bit arithmetic and rounded only once at the end.
inline double frac_mul(double alpha, u128 n) noexcept {
    if (alpha == 0.0 || n == 0) return 0.0;
    int e = 0;
    double f = std::frexp(alpha, &e);  // alpha = f * 2^e, f in [0.5, 1)
    u64 m = static_cast<u64>(std::ldexp(f, 53));
    int E = 53 - e;  // alpha = m / 2^E, E >= 53
    // V = m * n as three 64-bit limbs.
    u128 lo = static_cast<u128>(m) * static_cast<u64>(n);
    u128 hi = static_cast<u128>(m) * static_cast<u64>(n >> 64);
    u64 l0 = static_cast<u64>(lo);
    u128 mid = (lo >> 64) + static_cast<u64>(hi);
    u64 l1 = static_cast<u64>(mid);
    u64 l2 = static_cast<u64>((hi >> 64) + (mid >> 64));
    // Keep the low E bits.
    if (E < 64) {
        l0 &= (E == 0) ? 0 : (~0ULL >> (64 - E));
        l1 = 0;
        l2 = 0;
    } else if (E < 128) {
        l1 &= (E == 64) ? 0 : (~0ULL >> (128 - E));
        l2 = 0;
    } else if (E < 192) {
        l2 &= (E == 128) ? 0 : (~0ULL >> (192 - E));
    }
    long double v = std::ldexp(static_cast<long double>(l2), 128 - E) +
                    std::ldexp(static_cast<long double>(l1), 64 - E) +
                    std::ldexp(static_cast<long double>(l0), -E);
    double r = static_cast<double>(v);
    return r >= 1.0 ? 0.0 : r;
}

// frac(alpha * c) for a signed 128-bit multiplier.
inline double frac_mul_signed(double alpha, i128 c) noexcept {
    if (c >= 0) return frac_mul(alpha, static_cast<u128>(c));
    double f = frac_mul(alpha, static_cast<u128>(-c));
    return f == 0.0 ? 0.0 : 1.0 - f;
}

struct rational_coord {
    i64 num = 0;
    u64 den = 1;

    friend bool operator==(const rational_coord&, const rational_coord&) = default;
};

// A point of the torus (R/Z)^t. Coordinates are reduced to [0,1). A point
// built from rationals keeps the exact (num, den) pairs alongside the doubles
// so exponential sums can run in exact-phase mode.
class alpha_point {
public:
    alpha_point() = default;

    static alpha_point from_reals(std::span<const double> xs) {
        alpha_point a;
        a.coords_.reserve(xs.size());
        for (double x : xs) {
            if (!std::isfinite(x)) throw domain_error("alpha_point: non-finite coordinate");
            a.coords_.push_back(frac(x));
        }
        return a;
    }
    static alpha_point from_reals(std::initializer_list<double> xs) {
        return from_reals(std::span<const double>(xs.begin(), xs.size()));
    }

    static alpha_point from_rationals(std::span<const rational_coord> rs) {
        alpha_point a;
        std::vector<rational_coord> exact;
        for (auto r : rs) {
            if (r.den == 0) throw domain_error("alpha_point: zero denominator");
            i64 num = static_cast<i64>(mod_floor(r.num, r.den));
            u64 g = std::gcd(static_cast<u64>(num), r.den);
            rational_coord red{num / static_cast<i64>(g == 0 ? 1 : g), r.den / (g == 0 ? 1 : g)};
            if (num == 0) red = {0, 1};
            exact.push_back(red);
            a.coords_.push_back(static_cast<double>(static_cast<long double>(red.num) / red.den));
        }
        a.exact_ = std::move(exact);
        return a;
    }
    static alpha_point from_rationals(std::initializer_list<rational_coord> rs) {
        return from_rationals(std::span<const rational_coord>(rs.begin(), rs.size()));
    }

    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t j) const { return coords_.at(j); }
    const std::vector<double>& coords() const noexcept { return coords_; }
    bool is_exact() const noexcept { return exact_.has_value(); }
    const std::vector<rational_coord>& exact() const { return exact_.value(); }

    // Common denominator of the exact coordinates.
    u64 common_denominator() const {
        u64 l = 1;
        for (auto r : exact()) l = lcm_checked(l, r.den);
        return l;
    }

    alpha_point negated() const {
        if (is_exact()) {
            std::vector<rational_coord> rs = exact();
            for (auto& r : rs) r.num = -r.num;
            return from_rationals(rs);
        }
        std::vector<double> xs = coords_;
        for (auto& x : xs) x = -x;
        return from_reals(xs);
    }

    // alpha + n * e_j
    alpha_point shifted(std::size_t j, i64 n) const {
        if (is_exact()) {
            std::vector<rational_coord> rs = exact();
            rs.at(j).num += n * static_cast<i64>(rs[j].den);
            return from_rationals(rs);
        }
        std::vector<double> xs = coords_;
        xs.at(j) += static_cast<double>(n);
        return from_reals(xs);
    }

private:
    std::vector<double> coords_;
    std::optional<std::vector<rational_coord>> exact_;
};

// Evaluates e(sum_j alpha_j * c_j * n^{k_j}) for a fixed alpha, coefficient
// row c and exponent tuple k, in floating or exact-phase mode.
class phase_evaluator {
public:
    phase_evaluator(const alpha_point& alpha, std::span<const i64> row, std::span<const unsigned> k)
        : alpha_(alpha), row_(row.begin(), row.end()), k_(k.begin(), k.end()) {
        if (row_.size() != k_.size() || alpha.size() != k_.size())
            throw domain_error("phase_evaluator: alpha, row and k must have equal length");
        if (alpha.is_exact()) {
            modulus_ = alpha.common_denominator();
            for (std::size_t j = 0; j < k_.size(); ++j) {
                auto r = alpha.exact()[j];
                u64 scale = modulus_ / r.den;
                u64 c = mulmod(mod_floor(r.num, modulus_), scale, modulus_);
                c = mulmod(c, mod_floor(row_[j], modulus_), modulus_);
                coef_mod_.push_back(c);
            }
            if (modulus_ <= (1u << 20)) {
                roots_.resize(modulus_);
                for (u64 r = 0; r < modulus_; ++r)
                    roots_[r] = std::polar(1.0, static_cast<double>(2.0L * std::numbers::pi_v<long double> * r / modulus_));
            }
        }
    }

    bool exact() const noexcept { return modulus_ != 0; }

    // Integer phase numerator mod the common denominator (exact mode only).
    u64 phase_residue(u64 n) const {
        u64 acc = 0;
        u64 nm = n % modulus_;
        for (std::size_t j = 0; j < k_.size(); ++j)
            acc = (acc + mulmod(coef_mod_[j], powmod(nm, k_[j], modulus_), modulus_)) % modulus_;
        return acc;
    }

    double phase_turns(u64 n) const {
        if (exact()) return static_cast<double>(static_cast<long double>(phase_residue(n)) / modulus_);
        double acc = 0.0;
        for (std::size_t j = 0; j < k_.size(); ++j) {
            i128 c = static_cast<i128>(row_[j]) * ipow_checked(static_cast<i128>(n), k_[j]);
            acc += frac_mul_signed(alpha_[j], c);
        }
        return frac(acc);
    }

    cplx operator()(u64 n) const {
        if (exact()) {
            u64 r = phase_residue(n);
            if (!roots_.empty()) return roots_[r];
            return std::polar(1.0, static_cast<double>(2.0L * std::numbers::pi_v<long double> * r / modulus_));
        }
        return unit_phase(phase_turns(n));
    }

private:
    alpha_point alpha_;
    std::vector<i64> row_;
    std::vector<unsigned> k_;
    u64 modulus_ = 0;
    std::vector<u64> coef_mod_;
    std::vector<cplx> roots_;
};

} // namespace hlm
