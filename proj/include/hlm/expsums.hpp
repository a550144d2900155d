#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "hlm/arith.hpp"
#include "hlm/characters.hpp"
#include "hlm/phase.hpp"

namespace hlm {

// Real and imaginary parts accumulated separately with compensation.
class complex_sum {
public:
    void add(cplx z) noexcept {
        re_.add(z.real());
        im_.add(z.imag());
    }
    complex_sum& operator+=(cplx z) noexcept {
        add(z);
        return *this;
    }
    cplx value() const noexcept { return {re_.value(), im_.value()}; }

private:
    neumaier_sum<double> re_, im_;
};

// f_i(alpha) = sum_{p <= P} (log p) e(alpha . u_i p^k)
inline cplx prime_exp_sum(const alpha_point& alpha, std::span<const i64> row, std::span<const unsigned> k,
                          const prime_table& table) {
    phase_evaluator h(alpha, row, k);
    complex_sum acc;
    for (u64 p : table.primes()) acc += std::log(static_cast<double>(p)) * h(p);
    return acc.value();
}

// Coefficient-free f(alpha) = sum_{p <= P} (log p) e(alpha . p^k).
inline cplx prime_exp_sum(const alpha_point& alpha, std::span<const unsigned> k, const prime_table& table) {
    std::vector<i64> ones(k.size(), 1);
    return prime_exp_sum(alpha, ones, k, table);
}

// F_k(alpha) = sum_{n <= P} Lambda(n) e(alpha . u_i n^k)
inline cplx von_mangoldt_sum(const alpha_point& alpha, std::span<const i64> row, std::span<const unsigned> k,
                             const prime_table& table) {
    phase_evaluator h(alpha, row, k);
    const auto& lambda = table.lambda_values();
    complex_sum acc;
    for (u64 n = 2; n <= table.limit(); ++n)
        if (lambda[n] != 0.0) acc += lambda[n] * h(n);
    return acc.value();
}

// H(alpha, X) = sum_{l <= X} e(alpha_1 l^{k_1} + ... + alpha_t l^{k_t})
inline cplx weyl_sum(const alpha_point& alpha, std::span<const unsigned> k, double X) {
    if (!(X >= 0.0)) throw domain_error("weyl_sum: X must be non-negative");
    std::vector<i64> ones(k.size(), 1);
    phase_evaluator h(alpha, ones, k);
    complex_sum acc;
    const u64 n_max = static_cast<u64>(std::floor(X));
    for (u64 l = 1; l <= n_max; ++l) acc += h(l);
    return acc.value();
}

struct vaughan_parts {
    cplx S1, S2, S3, S4;
    double X = 0.0;

    cplx total() const { return S1 + S2 + S3 + S4; }
};

// Coefficient sequences of Vaughan's identity at cut X:
//   Lambda = Lambda_{<=X} + mu_{<=X} * log - Lambda_{<=X} * mu_{<=X} * 1 + Lambda_{>X} * mu_{>X} * 1.
// s3 carries the minus sign of the third term, so s1 + s2 + s3 + s4 = Lambda.
class vaughan_decomposer {
public:
    vaughan_decomposer(const prime_table& table, double X) : table_(table), X_(X) {
        const u64 P = table.limit();
        if (!(X >= 1.0)) throw domain_error("vaughan_decompose: X must be at least 1");
        if (X > static_cast<double>(P)) throw domain_error("vaughan_decompose: X exceeds P");
        const u64 x = static_cast<u64>(std::floor(X));
        const auto& lambda = table.lambda_values();
        const auto& mu = table.mu_values();
        s1_.assign(P + 1, 0.0);
        s2_.assign(P + 1, 0.0);
        s3_.assign(P + 1, 0.0);
        s4_.assign(P + 1, 0.0);
        for (u64 n = 1; n <= x; ++n) s1_[n] = lambda[n];
        // s2(n) = sum_{m | n, m <= X} mu(m) log(n/m)
        for (u64 m = 1; m <= x; ++m) {
            if (mu[m] == 0) continue;
            for (u64 l = 1; m * l <= P; ++l) s2_[m * l] += mu[m] * std::log(static_cast<double>(l));
        }
        // c3(m) = sum_{n1 n2 = m, n1, n2 <= X} Lambda(n1) mu(n2), m <= X^2
        const u64 m3 = std::min<u64>(P, x * x);
        c3_.assign(m3 + 1, 0.0);
        for (u64 n1 = 2; n1 <= x; ++n1) {
            if (lambda[n1] == 0.0) continue;
            for (u64 n2 = 1; n2 <= x && n1 * n2 <= m3; ++n2)
                if (mu[n2] != 0) c3_[n1 * n2] += lambda[n1] * mu[n2];
        }
        for (u64 m = 1; m <= m3; ++m) {
            if (c3_[m] == 0.0) continue;
            for (u64 n = m; n <= P; n += m) s3_[n] -= c3_[m];
        }
        // a(m) = sum_{l | m, l > X} Lambda(l); s4(n) = sum_{ml = n, m, l > X} a(m) mu(l)
        std::vector<double> a(P + 1, 0.0);
        for (u64 l = x + 1; l <= P; ++l) {
            if (lambda[l] == 0.0) continue;
            for (u64 m = l; m <= P; m += l) a[m] += lambda[l];
        }
        for (u64 l = x + 1; l <= P; ++l) {
            if (mu[l] == 0) continue;
            for (u64 m = x + 1; m * l <= P; ++m)
                if (a[m] != 0.0) s4_[m * l] += a[m] * mu[l];
        }
    }

    double X() const noexcept { return X_; }
    // Type I coefficient c3(m) for m <= min(P, floor(X)^2).
    const std::vector<double>& c3() const noexcept { return c3_; }

    vaughan_parts parts(const alpha_point& alpha, std::span<const i64> row, std::span<const unsigned> k) const {
        phase_evaluator h(alpha, row, k);
        complex_sum a1, a2, a3, a4;
        for (u64 n = 1; n <= table_.limit(); ++n) {
            if (s1_[n] == 0.0 && s2_[n] == 0.0 && s3_[n] == 0.0 && s4_[n] == 0.0) continue;
            cplx z = h(n);
            if (s1_[n] != 0.0) a1 += s1_[n] * z;
            if (s2_[n] != 0.0) a2 += s2_[n] * z;
            if (s3_[n] != 0.0) a3 += s3_[n] * z;
            if (s4_[n] != 0.0) a4 += s4_[n] * z;
        }
        return {a1.value(), a2.value(), a3.value(), a4.value(), X_};
    }

private:
    const prime_table& table_;
    double X_;
    std::vector<double> s1_, s2_, s3_, s4_, c3_;
};

inline vaughan_parts vaughan_decompose(const alpha_point& alpha, std::span<const i64> row,
                                       std::span<const unsigned> k, const prime_table& table, double X) {
    return vaughan_decomposer(table, X).parts(alpha, row, k);
}

// c_q(n) = mu(q/g) phi(q) / phi(q/g), g = gcd(n, q).
inline i64 ramanujan_sum(u64 q, i64 n) {
    u64 g = std::gcd(static_cast<u64>(n < 0 ? -n : n), q);
    if (n == 0) g = q;
    u64 d = q / g;
    return static_cast<i64>(moebius(d)) * static_cast<i64>(euler_phi(q) / euler_phi(d));
}

// W_i(q, a, chi) = sum_{r mod q} e(sum_j a_j u_ij r^{k_j} / q) chi(r); without a
// character the sum runs over units r.
inline cplx complete_sum_W(u64 q, std::span<const i64> a, std::span<const i64> row, std::span<const unsigned> k,
                           const dirichlet_character* chi = nullptr) {
    if (a.size() != k.size() || row.size() != k.size())
        throw domain_error("complete_sum_W: a, row and k must have equal length");
    std::vector<u64> coef(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) coef[j] = mulmod(mod_floor(a[j], q), mod_floor(row[j], q), q);
    complex_sum acc;
    for (u64 r = 1; r <= q; ++r) {
        if (std::gcd(r, q) != 1) continue;
        u64 ph = 0;
        for (std::size_t j = 0; j < k.size(); ++j) ph = (ph + mulmod(coef[j], powmod(r % q, k[j], q), q)) % q;
        cplx z = std::polar(1.0, static_cast<double>(2.0L * std::numbers::pi_v<long double> * ph / q));
        if (chi) z *= (*chi)(static_cast<i64>(r));
        acc += z;
    }
    return acc.value();
}

inline cplx complete_sum_W(u64 q, std::span<const i64> a, std::span<const i64> row, std::span<const unsigned> k,
                           const dirichlet_character& chi) {
    return complete_sum_W(q, a, row, k, &chi);
}

namespace detail {

// Distribution of the unit values (u_ij r^{k_j} mod q)_j weighted by chi(r):
// W(q, a, chi) = sum_v D[v] e(a . v / q). Returned as (cell, weight) pairs.
struct w_distribution {
    std::vector<std::vector<u64>> cells;  // residue vectors v
    std::vector<cplx> weight;
};

inline w_distribution twisted_distribution(u64 q, std::span<const i64> row, std::span<const unsigned> k,
                                           const dirichlet_character* chi) {
    const std::size_t t = k.size();
    // Dense index for small q^t, otherwise linear merge.
    std::vector<u64> base(t, 1);
    for (std::size_t j = 1; j < t; ++j) base[j] = base[j - 1] * q;
    std::vector<long> slot;
    long double cells = std::pow(static_cast<long double>(q), static_cast<long double>(t));
    bool dense = cells <= (1 << 24);
    if (dense) slot.assign(static_cast<std::size_t>(cells), -1);
    w_distribution d;
    for (u64 r = 1; r <= q; ++r) {
        if (std::gcd(r, q) != 1) continue;
        std::vector<u64> v(t);
        u64 idx = 0;
        for (std::size_t j = 0; j < t; ++j) {
            v[j] = mulmod(mod_floor(row[j], q), powmod(r % q, k[j], q), q);
            idx += v[j] * base[j];
        }
        cplx c = chi ? (*chi)(static_cast<i64>(r)) : cplx{1.0, 0.0};
        if (dense) {
            if (slot[idx] < 0) {
                slot[idx] = static_cast<long>(d.cells.size());
                d.cells.push_back(v);
                d.weight.push_back(c);
            } else {
                d.weight[slot[idx]] += c;
            }
        } else {
            auto it = std::find(d.cells.begin(), d.cells.end(), v);
            if (it == d.cells.end()) {
                d.cells.push_back(v);
                d.weight.push_back(c);
            } else {
                d.weight[it - d.cells.begin()] += c;
            }
        }
    }
    return d;
}

// Calls fn(a, W(q, a, chi)) for every a in [0, q)^t.
template <class Fn>
void for_each_W(u64 q, std::size_t t, const w_distribution& d, const std::vector<cplx>& roots, Fn&& fn) {
    std::vector<i64> a(t, 0);
    while (true) {
        complex_sum acc;
        for (std::size_t c = 0; c < d.cells.size(); ++c) {
            u64 ph = 0;
            for (std::size_t j = 0; j < t; ++j) ph = (ph + mulmod(static_cast<u64>(a[j]), d.cells[c][j], q)) % q;
            acc += d.weight[c] * roots[ph];
        }
        fn(a, acc.value());
        std::size_t j = 0;
        while (j < t && ++a[j] == static_cast<i64>(q)) a[j++] = 0;
        if (j == t) break;
    }
}

inline std::vector<cplx> roots_of_unity(u64 q) {
    std::vector<cplx> roots(q);
    for (u64 r = 0; r < q; ++r)
        roots[r] = std::polar(1.0, static_cast<double>(2.0L * std::numbers::pi_v<long double> * r / q));
    return roots;
}

} // namespace detail

struct w_moment_record {
    u64 q = 0;
    double max_ratio = 0.0;             // max over chi
    std::vector<double> per_character;  // ratio for each character, principal first
};

// max_chi sum_{a in [1,q]^t} |W(q, a, chi)|^{s-1} / q^{s-1}
inline w_moment_record w_moment_audit(u64 q, std::span<const unsigned> k, unsigned s, std::span<const i64> row,
                                      long double work_budget = 2e9) {
    if (s < 1) throw domain_error("w_moment_audit: s must be at least 1");
    const std::size_t t = k.size();
    long double work = std::pow(static_cast<long double>(q), static_cast<long double>(t)) *
                       static_cast<long double>(euler_phi(q)) * static_cast<long double>(euler_phi(q));
    if (work > work_budget) throw capacity_error("w_moment_audit: q^t phi(q)^2 exceeds the enumeration budget");
    w_moment_record rec;
    rec.q = q;
    auto roots = detail::roots_of_unity(q);
    for (const auto& chi : characters(q)) {
        auto d = detail::twisted_distribution(q, row, k, &chi);
        neumaier_sum<double> total;
        detail::for_each_W(q, t, d, roots, [&](const std::vector<i64>&, cplx w) {
            total += std::pow(std::abs(w), static_cast<double>(s) - 1.0);
        });
        double ratio = total.value() / std::pow(static_cast<double>(q), static_cast<double>(s) - 1.0);
        rec.per_character.push_back(ratio);
        rec.max_ratio = std::max(rec.max_ratio, ratio);
    }
    return rec;
}

struct cz_ratio_row {
    u64 q = 0;
    double max_ratio = 0.0;
};

struct cz_ratio_table {
    std::vector<cz_ratio_row> rows;
    double sup = 0.0;
    double exponent = 0.0;  // 1 - 1/(k_max + 1)
};

// |W_i(q, a, chi)| / q^{1 - 1/(k_max+1)}, maximised over a with
// gcd(a_1, ..., a_t, q) = 1 (which drops a = 0) and over characters.
inline cz_ratio_table cz_ratio_audit(u64 q_lo, u64 q_hi, std::span<const unsigned> k, std::span<const i64> row,
                                     bool principal_only = true, long double work_budget = 2e9) {
    const std::size_t t = k.size();
    const unsigned k_max = *std::max_element(k.begin(), k.end());
    cz_ratio_table out;
    out.exponent = 1.0 - 1.0 / (k_max + 1.0);
    long double work = 0;
    for (u64 q = std::max<u64>(q_lo, 2); q <= q_hi; ++q) {
        work += std::pow(static_cast<long double>(q), static_cast<long double>(t)) * euler_phi(q) *
                (principal_only ? 1 : euler_phi(q));
        if (work > work_budget) throw capacity_error("cz_ratio_audit: enumeration budget exceeded");
        auto roots = detail::roots_of_unity(q);
        cz_ratio_row r{q, 0.0};
        const double scale = std::pow(static_cast<double>(q), out.exponent);
        auto scan = [&](const dirichlet_character* chi) {
            auto d = detail::twisted_distribution(q, row, k, chi);
            detail::for_each_W(q, t, d, roots, [&](const std::vector<i64>& a, cplx w) {
                u64 g = q;
                for (i64 aj : a) g = std::gcd(g, static_cast<u64>(aj));
                if (g != 1) return;
                r.max_ratio = std::max(r.max_ratio, std::abs(w) / scale);
            });
        };
        if (principal_only) {
            scan(nullptr);
        } else {
            for (const auto& chi : characters(q)) scan(&chi);
        }
        out.sup = std::max(out.sup, r.max_ratio);
        out.rows.push_back(r);
    }
    return out;
}

} // namespace hlm
