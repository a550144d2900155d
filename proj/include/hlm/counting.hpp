#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hlm/arith.hpp"
#include "hlm/expsums.hpp"
#include "hlm/sysmodel.hpp"

namespace hlm {

// FNV-1a over the normalized (u, k); stable across platforms.
inline std::string system_digest(const diagonal_system& sys) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::int64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<std::uint64_t>(v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::int64_t>(sys.s()));
    mix(static_cast<std::int64_t>(sys.t()));
    for (unsigned k : sys.k()) mix(k);
    for (const auto& row : sys.u())
        for (i64 c : row) mix(c);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct solution_count {
    u64 P = 0;
    std::string digest;
    u128 unweighted = 0;
    double weighted = 0.0;  // sum over solutions of prod_i log p_i
    // all-equal-prime family, present when every column sums to 0
    bool has_diagonal_family = false;
    u128 diagonal_unweighted = 0;
    double diagonal_weighted = 0.0;
    long double work = 0;  // tuples enumerated on both sides

    u128 non_diagonal_unweighted() const { return unweighted - diagonal_unweighted; }
    double non_diagonal_weighted() const { return weighted - diagonal_weighted; }

    friend bool operator==(const solution_count&, const solution_count&) = default;
};

struct count_options {
    long double budget = 1e8;  // pi(P)^{ceil(s/2)}
};

namespace detail {

// Calls fn(sum vector, log weight) for every tuple of primes assigned to vars.
template <class Fn>
void for_each_prime_tuple(const diagonal_system& sys, const std::vector<std::size_t>& vars,
                          const std::vector<std::vector<i128>>& powers, const std::vector<double>& logs, Fn&& fn) {
    const std::size_t t = sys.t(), n = vars.size(), np = logs.size();
    std::vector<i128> acc(t, 0);
    if (n == 0) {
        fn(acc, 1.0);
        return;
    }
    if (np == 0) return;
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        std::fill(acc.begin(), acc.end(), 0);
        double w = 1.0;
        for (std::size_t v = 0; v < n; ++v) {
            const auto& row = sys.row(vars[v]);
            for (std::size_t j = 0; j < t; ++j) acc[j] += row[j] * powers[idx[v]][j];
            w *= logs[idx[v]];
        }
        fn(acc, w);
        std::size_t v = 0;
        while (v < n && ++idx[v] == np) idx[v++] = 0;
        if (v == n) return;
    }
}

} // namespace detail

// R(P) with logarithmic weights. The smaller half of the variables is stored
// as sorted (sum vector, count, weight) buckets; the larger half is streamed
// and matched against the negated sum.
inline solution_count brute_force_R(const diagonal_system& sys, const prime_table& table,
                                    const count_options& opt = {}) {
    const std::size_t s = sys.s(), t = sys.t();
    const auto& primes = table.primes();
    solution_count out;
    out.P = table.limit();
    out.digest = system_digest(sys);
    const std::size_t right_n = (s + 1) / 2, left_n = s - right_n;
    const long double np = static_cast<long double>(primes.size());
    if (std::pow(np, static_cast<long double>(right_n)) > opt.budget)
        throw capacity_error("brute_force_R: pi(P)^ceil(s/2) exceeds the budget");
    // |sum_i u_ij p_i^{k_j}| stays below 2^126.
    for (std::size_t j = 0; j < t; ++j) {
        long double bound = 0;
        for (std::size_t i = 0; i < s; ++i)
            bound += std::fabs(static_cast<long double>(sys.row(i)[j])) *
                     std::pow(static_cast<long double>(out.P), static_cast<long double>(sys.k()[j]));
        if (bound >= std::ldexp(1.0L, 126)) throw capacity_error("brute_force_R: partial sums overflow 128 bits");
    }
    std::vector<std::vector<i128>> powers(primes.size(), std::vector<i128>(t));
    std::vector<double> logs(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
        logs[i] = std::log(static_cast<double>(primes[i]));
        for (std::size_t j = 0; j < t; ++j) powers[i][j] = ipow_checked(static_cast<i128>(primes[i]), sys.k()[j]);
    }
    std::vector<std::size_t> left(left_n), right(right_n);
    std::iota(left.begin(), left.end(), 0);
    std::iota(right.begin(), right.end(), left_n);

    // Left buckets: flattened keys sorted lexicographically.
    std::vector<i128> keys;
    std::vector<double> wts;
    detail::for_each_prime_tuple(sys, left, powers, logs, [&](const std::vector<i128>& v, double w) {
        keys.insert(keys.end(), v.begin(), v.end());
        wts.push_back(w);
        out.work += 1;
    });
    const std::size_t nl = wts.size();
    std::vector<std::size_t> order(nl);
    std::iota(order.begin(), order.end(), 0);
    auto key_less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(keys.begin() + a * t, keys.begin() + (a + 1) * t, keys.begin() + b * t,
                                            keys.begin() + (b + 1) * t);
    };
    std::sort(order.begin(), order.end(), key_less);
    std::vector<i128> bkeys;
    std::vector<u64> bcount;
    std::vector<double> bweight;
    for (std::size_t i = 0; i < nl;) {
        std::size_t j = i;
        neumaier_sum<double> w;
        u64 c = 0;
        while (j < nl && !key_less(order[i], order[j])) {
            w += wts[order[j]];
            ++c;
            ++j;
        }
        bkeys.insert(bkeys.end(), keys.begin() + order[i] * t, keys.begin() + (order[i] + 1) * t);
        bcount.push_back(c);
        bweight.push_back(w.value());
        i = j;
    }
    keys.clear();
    keys.shrink_to_fit();
    const std::size_t nb = bcount.size();

    neumaier_sum<double> weighted;
    std::vector<i128> target(t);
    detail::for_each_prime_tuple(sys, right, powers, logs, [&](const std::vector<i128>& v, double w) {
        out.work += 1;
        for (std::size_t j = 0; j < t; ++j) target[j] = -v[j];
        std::size_t lo = 0, hi = nb;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (std::lexicographical_compare(bkeys.begin() + mid * t, bkeys.begin() + (mid + 1) * t, target.begin(),
                                             target.end()))
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo < nb && std::equal(target.begin(), target.end(), bkeys.begin() + lo * t)) {
            out.unweighted += bcount[lo];
            weighted += bweight[lo] * w;
        }
    });
    out.weighted = weighted.value();

    out.has_diagonal_family = sys.admits_diagonal_family();
    if (out.has_diagonal_family) {
        neumaier_sum<double> dw;
        for (double l : logs) dw += std::pow(l, static_cast<double>(s));
        out.diagonal_unweighted = primes.size();
        out.diagonal_weighted = dw.value();
    }
    return out;
}

struct dft_record {
    u64 M = 0;
    double grid_average = 0.0;  // real part of (1/M) sum_a prod_i f_i(a/M)
    double grid_imag = 0.0;
    double brute_weighted = 0.0;
    double discrepancy = 0.0;
    bool aliasing_expected = false;  // M <= max |sum_i u_i p_i^k|
    bool agrees = false;             // discrepancy <= 1e-8 max(1, weighted)
};

// Grid form of the orthogonality identity for t = 1: prod_i f_i is a
// trigonometric polynomial, so its M-point average is the exact integral
// once M exceeds every |sum_i u_i p_i^k|.
inline dft_record dft_orthogonality_check(const diagonal_system& sys, const prime_table& table, u64 M) {
    if (sys.t() != 1) throw structure_error("dft_orthogonality_check: only single-equation systems (t = 1)");
    if (M < 1) throw domain_error("dft_orthogonality_check: M must be positive");
    dft_record rec;
    rec.M = M;
    const auto& primes = table.primes();
    const unsigned k = sys.k()[0];
    long double span = 0;
    for (std::size_t i = 0; i < sys.s(); ++i)
        span += std::fabs(static_cast<long double>(sys.row(i)[0])) *
                std::pow(static_cast<long double>(table.limit()), static_cast<long double>(k));
    rec.aliasing_expected = static_cast<long double>(M) <= span;

    std::map<i64, unsigned> rows;
    for (const auto& r : sys.u()) ++rows[r[0]];
    std::vector<u64> pk(primes.size());
    std::vector<double> logs(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
        pk[i] = powmod(primes[i], k, M);
        logs[i] = std::log(static_cast<double>(primes[i]));
    }
    std::vector<cplx> roots(M);
    for (u64 r = 0; r < M; ++r)
        roots[r] = std::polar(1.0, static_cast<double>(2.0L * std::numbers::pi_v<long double> * r / M));
    complex_sum total;
    for (u64 a = 0; a < M; ++a) {
        cplx prod{1.0, 0.0};
        for (const auto& [u, n] : rows) {
            u64 c = mulmod(a, mod_floor(u, M), M);
            complex_sum f;
            for (std::size_t i = 0; i < primes.size(); ++i) f += logs[i] * roots[mulmod(c, pk[i], M)];
            cplx fv = f.value();
            for (unsigned e = 0; e < n; ++e) prod *= fv;
        }
        total += prod;
    }
    cplx avg = total.value() / static_cast<double>(M);
    rec.grid_average = avg.real();
    rec.grid_imag = avg.imag();
    rec.brute_weighted = brute_force_R(sys, table).weighted;
    rec.discrepancy = std::abs(avg - cplx(rec.brute_weighted, 0.0));
    rec.agrees = rec.discrepancy <= 1e-8 * std::max(1.0, rec.brute_weighted);
    return rec;
}

// digest, P, unweighted, weighted, diagonal_unweighted, diagonal_weighted
inline std::string to_csv(const std::vector<solution_count>& rows) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "digest,P,unweighted,weighted,diagonal_unweighted,diagonal_weighted\n";
    for (const auto& r : rows)
        out << r.digest << ',' << r.P << ',' << to_string_u128(r.unweighted) << ',' << r.weighted << ','
            << to_string_u128(r.diagonal_unweighted) << ',' << r.diagonal_weighted << '\n';
    return out.str();
}

} // namespace hlm
