#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hlm/arith.hpp"
#include "hlm/error.hpp"

namespace hlm {

struct mean_value_record {
    unsigned ell = 0;
    std::vector<unsigned> k;
    u64 P = 0;
    u128 count = 0;       // J_{ell,k}(P) = sum_v N(v)^2
    u128 mass = 0;        // sum_v N(v) = P^ell
    std::size_t buckets = 0;
    double elapsed = 0.0;  // seconds
};

struct mean_value_options {
    long double multiset_budget = 2e7;  // non-decreasing ell-tuples held in memory
};

namespace detail {

// Multinomial ell! / prod m_i! for a sorted tuple.
inline u64 arrangements(const std::vector<u64>& x) {
    u64 num = 1;
    for (u64 i = 2; i <= x.size(); ++i) num *= i;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        if (i < x.size() && x[i] == x[i - 1]) {
            ++run;
            continue;
        }
        for (u64 f = 2; f <= run; ++f) num /= f;
        run = 1;
    }
    return num;
}

// Visits each non-decreasing tuple 1 <= x_1 <= ... <= x_ell <= P.
template <class Fn>
void for_each_multiset(unsigned ell, u64 P, Fn&& fn) {
    std::vector<u64> x(ell, 1);
    while (true) {
        fn(x);
        std::size_t i = ell;
        while (i > 0 && x[i - 1] == P) --i;
        if (i == 0) return;
        ++x[i - 1];
        for (std::size_t j = i; j < ell; ++j) x[j] = x[i - 1];
    }
}

} // namespace detail

// Exact J_{ell,k}(P): bucket the power-sum vectors of all x in [1,P]^ell by
// enumerating multisets with their arrangement counts, then sum the squared
// bucket sizes.
inline mean_value_record count_J(unsigned ell, const std::vector<unsigned>& k, u64 P,
                                 const mean_value_options& opt = {}) {
    if (ell < 1) throw domain_error("count_J: ell must be positive");
    if (k.empty()) throw domain_error("count_J: empty exponent tuple");
    if (P < 1) throw domain_error("count_J: P must be positive");
    auto t0 = std::chrono::steady_clock::now();
    long double multisets = 1;
    for (unsigned i = 0; i < ell; ++i) multisets = multisets * (P + i) / (i + 1);
    if (multisets > opt.multiset_budget)
        throw capacity_error("count_J: " + std::to_string(static_cast<double>(multisets)) +
                             " multisets exceed the budget");
    const std::size_t t = k.size();
    // Mixed radix with digit j in [0, ell P^{k_j}].
    std::vector<u128> radix(t);
    long double key_bits = 0;
    for (std::size_t j = 0; j < t; ++j) {
        i128 top = ipow_checked(static_cast<i128>(P), k[j]) * ell;
        radix[j] = static_cast<u128>(top) + 1;
        key_bits += std::log2(static_cast<long double>(radix[j]));
    }
    const bool packed = key_bits < 127.0L;
    mean_value_record rec;
    rec.ell = ell;
    rec.k = k;
    rec.P = P;

    std::vector<u128> pows(static_cast<std::size_t>(P + 1) * t);
    for (u64 x = 1; x <= P; ++x)
        for (std::size_t j = 0; j < t; ++j) pows[x * t + j] = static_cast<u128>(ipow_checked(static_cast<i128>(x), k[j]));

    auto finish = [&](auto&& weights_in_order) {
        for (u128 n : weights_in_order) {
            rec.count += n * n;
            rec.mass += n;
            ++rec.buckets;
        }
        rec.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    if (packed) {
        std::vector<std::pair<u128, u64>> items;
        items.reserve(static_cast<std::size_t>(multisets));
        detail::for_each_multiset(ell, P, [&](const std::vector<u64>& x) {
            u128 key = 0;
            for (std::size_t j = t; j-- > 0;) {
                u128 v = 0;
                for (u64 xi : x) v += pows[xi * t + j];
                key = key * radix[j] + v;
            }
            items.emplace_back(key, detail::arrangements(x));
        });
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<u128> sizes;
        for (std::size_t i = 0; i < items.size();) {
            u128 n = 0;
            std::size_t j = i;
            while (j < items.size() && items[j].first == items[i].first) n += items[j++].second;
            sizes.push_back(n);
            i = j;
        }
        finish(sizes);
        return rec;
    }
    // Tuple keys: flattened power-sum vectors sorted through an index.
    std::vector<u128> keys;
    std::vector<u64> weight;
    detail::for_each_multiset(ell, P, [&](const std::vector<u64>& x) {
        for (std::size_t j = 0; j < t; ++j) {
            u128 v = 0;
            for (u64 xi : x) v += pows[xi * t + j];
            keys.push_back(v);
        }
        weight.push_back(detail::arrangements(x));
    });
    std::vector<std::size_t> order(weight.size());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(keys.begin() + a * t, keys.begin() + (a + 1) * t, keys.begin() + b * t,
                                            keys.begin() + (b + 1) * t);
    };
    std::sort(order.begin(), order.end(), less);
    std::vector<u128> sizes;
    for (std::size_t i = 0; i < order.size();) {
        u128 n = 0;
        std::size_t j = i;
        while (j < order.size() && !less(order[i], order[j])) n += weight[order[j++]];
        sizes.push_back(n);
        i = j;
    }
    finish(sizes);
    return rec;
}

struct slope_record {
    unsigned ell = 0;
    std::vector<unsigned> k;
    double slope = 0.0;
    double predicted = 0.0;  // max(ell, 2 ell - K)
    double gap = 0.0;        // slope - predicted
};

// Least-squares slope of log J against log P over a ladder of records.
inline slope_record exponent_fit(const std::vector<mean_value_record>& recs) {
    if (recs.size() < 4) throw domain_error("exponent_fit: need at least 4 ladder points");
    for (const auto& r : recs)
        if (r.ell != recs[0].ell || r.k != recs[0].k) throw domain_error("exponent_fit: records mix (ell, k)");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : recs) {
        double x = std::log(static_cast<double>(r.P)), y = std::log(static_cast<double>(r.count));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(recs.size());
    const double denom = n * sxx - sx * sx;
    if (denom <= 0) throw domain_error("exponent_fit: ladder needs distinct P values");
    slope_record s;
    s.ell = recs[0].ell;
    s.k = recs[0].k;
    s.slope = (n * sxy - sx * sy) / denom;
    const double K = std::accumulate(s.k.begin(), s.k.end(), 0.0);
    s.predicted = std::max<double>(s.ell, 2.0 * s.ell - K);
    s.gap = s.slope - s.predicted;
    return s;
}

// ell, k, P, count, log-slope (the fitted slope repeated on each row)
inline std::string to_csv(const std::vector<mean_value_record>& recs, const slope_record* fit = nullptr) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "ell,k,P,count,log_slope\n";
    for (const auto& r : recs) {
        out << r.ell << ",\"";
        for (std::size_t j = 0; j < r.k.size(); ++j) out << (j ? " " : "") << r.k[j];
        out << "\"," << r.P << ',' << to_string_u128(r.count) << ',';
        if (fit) out << fit->slope;
        out << '\n';
    }
    return out.str();
}

} // namespace hlm
