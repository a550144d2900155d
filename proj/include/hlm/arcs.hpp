#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlm/arith.hpp"
#include "hlm/expsums.hpp"
#include "hlm/phase.hpp"
#include "hlm/rng.hpp"
#include "hlm/sysmodel.hpp"

namespace hlm {

struct convergent {
    i64 a = 0;
    u64 q = 1;
    friend bool operator==(const convergent&, const convergent&) = default;
};

namespace detail {

// Appends h/k unless it repeats the previous denominator, in which case the
// closer of the two is kept (x = [0; 1, ...] yields 0/1 then 1/1).
template <class Err>
void push_convergent(std::vector<convergent>& out, i64 h, u64 k, Err&& err) {
    if (!out.empty() && out.back().q == k) {
        if (err(h, k) < err(out.back().a, out.back().q)) out.back() = {h, k};
        return;
    }
    out.push_back({h, k});
}

} // namespace detail

// Convergents of the continued fraction of num/den with denominator <= q_bound.
inline std::vector<convergent> cf_convergents(rational_coord x, u64 q_bound) {
    if (q_bound < 1) throw domain_error("cf_convergents: q_bound must be at least 1");
    if (x.den == 0) throw domain_error("cf_convergents: zero denominator");
    std::vector<convergent> out;
    i128 n = x.num, d = x.den;
    i128 h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // h_{-1}, h_{-2}, k_{-1}, k_{-2}
    auto err = [&](i64 h, u64 k) {
        i128 e = static_cast<i128>(x.num) * static_cast<i128>(k) - static_cast<i128>(h) * static_cast<i128>(x.den);
        return static_cast<long double>(e < 0 ? -e : e) / (static_cast<long double>(k) * x.den);
    };
    while (d != 0) {
        i128 a = n / d;
        if (n % d != 0 && (n < 0) != (d < 0)) --a;
        i128 h = a * h0 + h1, k = a * k0 + k1;
        if (k > static_cast<i128>(q_bound)) break;
        detail::push_convergent(out, static_cast<i64>(h), static_cast<u64>(k), err);
        h1 = h0;
        h0 = h;
        k1 = k0;
        k0 = k;
        i128 r = n - a * d;
        n = d;
        d = r;
    }
    return out;
}

// Floating version; stops once the remainder is at rounding level.
inline std::vector<convergent> cf_convergents(double x, u64 q_bound) {
    if (q_bound < 1) throw domain_error("cf_convergents: q_bound must be at least 1");
    if (!std::isfinite(x)) throw domain_error("cf_convergents: non-finite input");
    std::vector<convergent> out;
    long double y = x;
    long double h0 = 1, h1 = 0, k0 = 0, k1 = 1;
    auto err = [&](i64 h, u64 k) { return std::fabs(static_cast<long double>(x) - static_cast<long double>(h) / k); };
    for (int iter = 0; iter < 128; ++iter) {
        long double a = std::floor(y);
        long double h = a * h0 + h1, k = a * k0 + k1;
        if (k > static_cast<long double>(q_bound)) break;
        detail::push_convergent(out, static_cast<i64>(h), static_cast<u64>(k), err);
        if (err(static_cast<i64>(h), static_cast<u64>(k)) == 0.0L) break;
        h1 = h0;
        h0 = h;
        k1 = k0;
        k0 = k;
        long double r = y - a;
        if (r < 1e-18L) break;
        y = 1.0L / r;
    }
    return out;
}

struct rational_approx {
    std::vector<i64> a;  // residues mod q
    u64 q = 1;
    std::vector<double> err;  // |alpha_j - a_j/q| on the torus
    bool overflow = false;    // lcm did not fit 64 bits; a and err are empty
};

namespace detail {

// Torus distance |alpha_j - a/q| with the exact inputs when available.
inline double approx_error(const alpha_point& alpha, std::size_t j, i64 a, u64 q) {
    if (alpha.is_exact()) {
        auto r = alpha.exact()[j];
        i128 num = static_cast<i128>(r.num) * static_cast<i128>(q) - static_cast<i128>(a) * static_cast<i128>(r.den);
        i128 den = static_cast<i128>(r.den) * static_cast<i128>(q);
        num = num % den;
        if (num < 0) num += den;
        i128 dist = std::min(num, den - num);
        return static_cast<double>(static_cast<long double>(dist) / static_cast<long double>(den));
    }
    long double d = static_cast<long double>(alpha[j]) - static_cast<long double>(a) / q;
    d -= std::round(d);
    return static_cast<double>(std::fabs(d));
}

inline convergent best_convergent(const alpha_point& alpha, std::size_t j, u64 bound) {
    auto cs = alpha.is_exact() ? cf_convergents(alpha.exact()[j], bound) : cf_convergents(alpha[j], bound);
    return cs.empty() ? convergent{0, 1} : cs.back();
}

} // namespace detail

// Per-coordinate best convergents b_j/q_j with q_j <= Q^{1/t}, combined as
// q = lcm(q_j), a_j = b_j q / q_j.
inline rational_approx simultaneous_approx(const alpha_point& alpha, double P, double delta) {
    const std::size_t t = alpha.size();
    if (t == 0) throw domain_error("simultaneous_approx: empty alpha");
    const double Q = std::pow(P, delta);
    const u64 bound = std::max<u64>(1, static_cast<u64>(std::floor(std::pow(Q, 1.0 / static_cast<double>(t)) + 1e-9)));
    std::vector<convergent> per(t);
    rational_approx r;
    u64 q = 1;
    for (std::size_t j = 0; j < t; ++j) {
        per[j] = detail::best_convergent(alpha, j, bound);
        try {
            q = lcm_checked(q, per[j].q);
        } catch (const capacity_error&) {
            r.overflow = true;
            return r;
        }
    }
    r.q = q;
    for (std::size_t j = 0; j < t; ++j) {
        i64 aj = per[j].a * static_cast<i64>(q / per[j].q);
        r.a.push_back(static_cast<i64>(mod_floor(aj, q)));
        r.err.push_back(detail::approx_error(alpha, j, aj, q));
    }
    return r;
}

enum class arc_kind { major, minor };
enum class arc_zone { inner, outer, none };

inline const char* to_string(arc_kind k) { return k == arc_kind::major ? "Major" : "Minor"; }
inline const char* to_string(arc_zone z) {
    switch (z) {
    case arc_zone::inner: return "Inner";
    case arc_zone::outer: return "Outer";
    case arc_zone::none: return "None";
    }
    return "?";
}

struct arc_label {
    arc_kind kind = arc_kind::minor;
    arc_zone zone = arc_zone::none;
    std::optional<rational_approx> approx;  // set for Major
};

struct arc_options {
    double A_inner = 2.0;
    u64 q_budget = 10'000;
};

// Major iff some q <= Q = P^delta has |alpha_j - a_j/q| <= Q/(q P^{k_j}) for
// all j (closed). The smallest such q is reported; it is automatically
// primitive. Inner iff q(1 + sum_j |theta_j| P^{k_j}) <= (log P)^A.
inline arc_label classify(const alpha_point& alpha, double P, double delta, std::span<const unsigned> k,
                          const arc_options& opt = {}) {
    if (!(delta > 0.0 && delta < 1.0)) throw domain_error("classify: delta must lie in (0, 1)");
    if (alpha.size() != k.size()) throw domain_error("classify: alpha and k differ in length");
    if (!(P >= 1.0)) throw domain_error("classify: P must be at least 1");
    const double Q = std::pow(P, delta);
    if (Q > static_cast<double>(opt.q_budget))
        throw capacity_error("classify: Q = P^delta exceeds the exhaustive budget; use a smaller delta");
    const std::size_t t = k.size();
    std::vector<double> width(t);
    for (std::size_t j = 0; j < t; ++j) width[j] = Q / std::pow(P, static_cast<double>(k[j]));
    const u64 q_max = static_cast<u64>(std::floor(Q + 1e-12));
    arc_label label;
    for (u64 q = 1; q <= q_max; ++q) {
        rational_approx r;
        r.q = q;
        bool ok = true;
        for (std::size_t j = 0; j < t && ok; ++j) {
            i64 a = static_cast<i64>(std::llround(static_cast<long double>(alpha[j]) * q));
            double e = detail::approx_error(alpha, j, a, q);
            // |alpha_j - a/q| <= Q/(q P^k)  <=>  q e <= Q / P^k
            ok = static_cast<long double>(e) * q <= static_cast<long double>(width[j]);
            r.a.push_back(static_cast<i64>(mod_floor(a, q)));
            r.err.push_back(e);
        }
        if (!ok) continue;
        label.kind = arc_kind::major;
        double spread = 1.0;
        for (std::size_t j = 0; j < t; ++j) spread += r.err[j] * std::pow(P, static_cast<double>(k[j]));
        const double R = std::pow(std::log(P), opt.A_inner);
        label.zone = (static_cast<double>(q) * spread <= R) ? arc_zone::inner : arc_zone::outer;
        label.approx = std::move(r);
        return label;
    }
    return label;
}

struct decay_row {
    u64 P = 0;
    double theta = 0.0;
    std::size_t minor_samples = 0;
    std::size_t discarded_major = 0;
    double median = 0.0;
    double sup = 0.0;
};

struct decay_options {
    double delta = 0.05;
    double A_inner = 2.0;
    std::size_t max_draw_factor = 100;  // give up after n_samples * this many draws
};

// For each P draws alpha uniformly until n_samples minor-arc points are kept
// and records the median and sup of max_i |f_i(alpha)| / theta(P). Sample m of
// every row uses the seed derived from (seed, m), so rows are comparable.
inline std::vector<decay_row> minor_decay_scan(const diagonal_system& sys, const std::vector<u64>& P_list,
                                               std::size_t n_samples, std::uint64_t seed,
                                               const decay_options& opt = {}) {
    if (n_samples < 10) throw domain_error("minor_decay_scan: need at least 10 samples");
    std::map<std::vector<i64>, int> distinct;
    for (const auto& r : sys.u()) distinct[r];
    std::vector<decay_row> out;
    for (u64 P : P_list) {
        prime_table table(P);
        decay_row row;
        row.P = P;
        row.theta = table.theta();
        std::vector<double> ratios;
        const std::size_t max_draws = n_samples * opt.max_draw_factor;
        for (std::size_t m = 0; m < max_draws && ratios.size() < n_samples; ++m) {
            rng gen(derive_seed(seed, m));
            std::vector<double> xs(sys.t());
            for (auto& x : xs) x = gen.uniform();
            auto alpha = alpha_point::from_reals(xs);
            if (classify(alpha, static_cast<double>(P), opt.delta, sys.k(), {opt.A_inner, 10'000}).kind ==
                arc_kind::major) {
                ++row.discarded_major;
                continue;
            }
            double best = 0.0;
            for (const auto& [r, unused] : distinct)
                best = std::max(best, std::abs(prime_exp_sum(alpha, r, sys.k(), table)));
            ratios.push_back(table.theta() > 0 ? best / table.theta() : 0.0);
        }
        if (ratios.size() < n_samples)
            throw domain_error("minor_decay_scan: too few minor-arc samples at P=" + std::to_string(P) +
                               " (degenerate input)");
        row.minor_samples = ratios.size();
        row.sup = *std::max_element(ratios.begin(), ratios.end());
        std::sort(ratios.begin(), ratios.end());
        const std::size_t n = ratios.size();
        row.median = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
        out.push_back(row);
    }
    return out;
}

} // namespace hlm
