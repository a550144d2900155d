#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hlm/arith.hpp"
#include "hlm/expsums.hpp"
#include "hlm/sysmodel.hpp"

namespace hlm {

using big_int = boost::multiprecision::cpp_int;
using big_rational = boost::multiprecision::cpp_rational;

struct local_budget {
    u64 cell_limit = u64{1} << 24;      // q^t residue cells held in memory
    long double work_limit = 4e9;       // cell updates for count_M
    long double direct_work_limit = 2e9;  // q^t * (distinct row values) for the direct A(q)
};

namespace detail {

// Histogram of (u_i m^{k_j} mod q)_j over units m, as (cell index, multiplicity).
inline std::vector<std::pair<u64, u64>> unit_histogram(const std::vector<u64>& contrib) {
    std::map<u64, u64> h;
    for (u64 c : contrib)
        if (c != UINT64_MAX) ++h[c];
    return {h.begin(), h.end()};
}

template <class C>
C convolve_count(const diagonal_system& sys, u64 q, u64 cells) {
    const std::size_t t = sys.t();
    auto contrib = unit_contributions(sys, q);
    std::vector<C> dist(cells, C(0)), next(cells);
    dist[0] = 1;
    for (std::size_t i = 0; i < sys.s(); ++i) {
        auto hist = unit_histogram(contrib[i]);
        std::fill(next.begin(), next.end(), C(0));
        for (u64 c = 0; c < cells; ++c) {
            if (dist[c] == 0) continue;
            for (auto [v, n] : hist) {
                u64 to = (t == 1) ? (c + v) % q : add_cells(c, v, q, t);
                next[to] += dist[c] * n;
            }
        }
        dist.swap(next);
    }
    return dist[0];
}

inline long double cells_of(u64 q, std::size_t t) {
    return std::pow(static_cast<long double>(q), static_cast<long double>(t));
}

} // namespace detail

// Number of unit tuples m mod q with sum_i u_ij m_i^{k_j} = 0 mod q for all j.
// Convolves the per-variable unit-residue distributions over (Z/q)^t.
inline big_int count_M(const diagonal_system& sys, u64 q, const local_budget& budget = {}) {
    if (q == 0) throw domain_error("count_M: q must be positive");
    const long double cells = detail::cells_of(q, sys.t());
    const long double phi = static_cast<long double>(euler_phi(q));
    if (cells > budget.cell_limit || cells * phi * sys.s() > budget.work_limit)
        throw capacity_error("count_M: q=" + std::to_string(q) + " exceeds the enumeration budget");
    // phi(q)^s bounds every intermediate count.
    long double bits = sys.s() * std::log2(std::max<long double>(phi, 1));
    if (bits < 126) {
        u128 v = detail::convolve_count<u128>(sys, q, static_cast<u64>(cells));
        big_int r = static_cast<u64>(v >> 64);
        r <<= 64;
        r += static_cast<u64>(v);
        return r;
    }
    if (bits < 500) {
        using boost::multiprecision::uint512_t;
        return big_int(detail::convolve_count<uint512_t>(sys, q, static_cast<u64>(cells)));
    }
    throw capacity_error("count_M: phi(q)^s exceeds 512 bits");
}

// q^t M(q) / phi(q)^s = sum_{d | q} A(d)
inline big_rational normalized_M(const diagonal_system& sys, u64 q, const local_budget& budget = {}) {
    big_int num = count_M(sys, q, budget);
    num *= boost::multiprecision::pow(big_int(q), static_cast<unsigned>(sys.t()));
    big_int den = boost::multiprecision::pow(big_int(euler_phi(q)), static_cast<unsigned>(sys.s()));
    return big_rational(num, den);
}

// A(q) by Moebius inversion of the identity above; exact.
inline big_rational A_from_M_exact(const diagonal_system& sys, u64 q, const local_budget& budget = {}) {
    if (q == 0) throw domain_error("A_from_M: q must be positive");
    big_rational a = 0;
    for (u64 d : factorize(q).divisors()) {
        int mu = moebius(q / d);
        if (mu == 0) continue;
        big_rational g = normalized_M(sys, d, budget);
        if (mu > 0)
            a += g;
        else
            a -= g;
    }
    return a;
}

inline double A_from_M(const diagonal_system& sys, u64 q, const local_budget& budget = {}) {
    return static_cast<double>(A_from_M_exact(sys, q, budget));
}

// Direct A(q) = phi(q)^{-s} sum_{a mod q, gcd(a,q)=1} prod_i W_i(q, a).
// Rows with equal coefficient vectors share one W evaluation.
inline cplx local_factor_A_complex(const diagonal_system& sys, u64 q, const local_budget& budget = {}) {
    if (q == 0) throw domain_error("local_factor_A: q must be positive");
    if (q == 1) return {1.0, 0.0};
    const std::size_t t = sys.t();
    std::map<std::vector<i64>, unsigned> rows;
    for (const auto& r : sys.u()) ++rows[r];
    std::vector<detail::w_distribution> dists;
    std::vector<unsigned> mult;
    long double per_a = 0;
    for (const auto& [r, n] : rows) {
        dists.push_back(detail::twisted_distribution(q, r, sys.k(), nullptr));
        mult.push_back(n);
        per_a += dists.back().cells.size();
    }
    if (detail::cells_of(q, t) * per_a * t > budget.direct_work_limit)
        throw capacity_error("local_factor_A: direct sum for q=" + std::to_string(q) + " exceeds the budget");
    auto roots = detail::roots_of_unity(q);
    const double phi = static_cast<double>(euler_phi(q));
    complex_sum total;
    std::vector<i64> a(t, 0);
    while (true) {
        u64 g = q;
        for (i64 x : a) g = std::gcd(g, static_cast<u64>(x));
        if (g == 1) {
            cplx prod{1.0, 0.0};
            for (std::size_t r = 0; r < dists.size(); ++r) {
                complex_sum w;
                const auto& d = dists[r];
                for (std::size_t c = 0; c < d.cells.size(); ++c) {
                    u64 ph = 0;
                    for (std::size_t j = 0; j < t; ++j) ph = (ph + mulmod(static_cast<u64>(a[j]), d.cells[c][j], q)) % q;
                    w += d.weight[c] * roots[ph];
                }
                cplx wn = w.value() / phi;
                for (unsigned e = 0; e < mult[r]; ++e) prod *= wn;
            }
            total += prod;
        }
        std::size_t j = 0;
        while (j < t && ++a[j] == static_cast<i64>(q)) a[j++] = 0;
        if (j == t) break;
    }
    return total.value();
}

enum class factor_method { direct, from_M, euler_combine };

inline const char* to_string(factor_method m) {
    switch (m) {
    case factor_method::direct: return "Direct";
    case factor_method::from_M: return "FromM";
    case factor_method::euler_combine: return "EulerCombine";
    }
    return "?";
}

// Real A(q): the direct sum when it fits the budget, otherwise the exact
// divisor inversion.
inline double local_factor_A(const diagonal_system& sys, u64 q, const local_budget& budget = {},
                             factor_method* used = nullptr) {
    try {
        cplx a = local_factor_A_complex(sys, q, budget);
        if (std::abs(a.imag()) > 1e-9 * (1.0 + std::abs(a)))
            throw domain_error("local_factor_A: imaginary part " + std::to_string(a.imag()) + " is not negligible");
        if (used) *used = factor_method::direct;
        return a.real();
    } catch (const capacity_error&) {
        if (used) *used = factor_method::from_M;
        return A_from_M(sys, q, budget);
    }
}

struct factor_entry {
    u64 q = 0;
    double A = 0.0;
    std::optional<big_int> M;
    factor_method method = factor_method::direct;
};

struct local_factor_table {
    std::vector<factor_entry> entries;

    const factor_entry* find(u64 q) const {
        for (const auto& e : entries)
            if (e.q == q) return &e;
        return nullptr;
    }
};

// q, A_q, M_q, method; A_q with 17 significant digits, M_q empty when not counted.
inline std::string to_csv(const local_factor_table& table) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "q,A_q,M_q,method\n";
    for (const auto& e : table.entries) {
        out << e.q << ',' << e.A << ',';
        if (e.M) out << e.M->str();
        out << ',' << to_string(e.method) << '\n';
    }
    return out.str();
}

struct euler_factor {
    u64 p = 0;
    unsigned depth = 0;   // L_p
    bool capped = false;  // depth limited by enumeration rather than the decay rule
    double value = 1.0;   // 1 + sum_{l <= L_p} A(p^l)
};

struct singular_series_options {
    u64 p_cut = 100;
    unsigned max_depth = 0;        // 0: decay rule only
    double depth_tolerance = 1e-6;  // (p^L)^{-1/(k_max+1)} below this
    long double depth_work_limit = 1e8;  // count_M cell updates allowed per Euler factor
    local_budget budget{};
};

struct singular_series_estimate {
    u64 q_cut = 0;
    double partial_sum = 0.0;  // sum_{q < q_cut} A(q)
    u64 p_cut = 0;
    double euler_product = 1.0;  // prod_{p <= p_cut} factor_p
    std::vector<euler_factor> factors;
    double tail_constant_fit = 0.0;  // max |A(q)| q^{1/(k_max+1)} over the computed range
    double tail_exponent = 0.0;      // eta from the log-log fit |A(q)| ~ C q^{-eta}
    double tail_bound = 0.0;         // fitted bound on |sum_{q >= q_cut} A(q)|
    double tail_product_lower = 0.0;  // fitted lower bound for prod_{p > p_cut}
    bool positive = false;
    std::vector<double> A;  // A(q) for q < q_cut, index q (A[0] unused)
    local_factor_table table;
};

namespace detail {

// Depth L with (p^L)^{-1/(k_max+1)} < tol, reduced while p^{tL} is too large.
inline euler_factor euler_factor_at(const diagonal_system& sys, u64 p, const singular_series_options& opt) {
    euler_factor f;
    f.p = p;
    const double kexp = 1.0 / (sys.max_degree() + 1.0);
    unsigned want = 1;
    while (std::pow(static_cast<double>(p), -kexp * want) >= opt.depth_tolerance) ++want;
    if (opt.max_depth) want = std::min(want, opt.max_depth);
    unsigned L = want;
    auto feasible = [&](unsigned l) {
        long double q = std::pow(static_cast<long double>(p), static_cast<long double>(l));
        if (q > 1e18L) return false;
        long double cells = cells_of(static_cast<u64>(q), sys.t());
        long double work = cells * (q * (p - 1) / p) * sys.s();
        return cells <= opt.budget.cell_limit && work <= opt.budget.work_limit && work <= opt.depth_work_limit;
    };
    while (L > 1 && !feasible(L)) --L;
    f.depth = L;
    f.capped = L < want;
    // 1 + sum_{l <= L} A(p^l) telescopes to p^{tL} M(p^L) / phi(p^L)^s.
    f.value = static_cast<double>(normalized_M(sys, ipow_u64(p, L), opt.budget));
    return f;
}

struct power_fit {
    double eta = 0.0;
    double C = 0.0;
    std::size_t points = 0;
};

// Least squares of log|y| on log x over nonzero entries, then the smallest C
// with |y| <= C x^{-eta} on the data.
inline power_fit fit_decay(const std::vector<std::pair<double, double>>& xy) {
    power_fit f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<std::pair<double, double>> pts;
    for (auto [x, y] : xy) {
        if (x <= 1.0 || std::abs(y) < 1e-300) continue;
        pts.emplace_back(std::log(x), std::log(std::abs(y)));
    }
    f.points = pts.size();
    if (pts.size() < 2) return f;
    for (auto [lx, ly] : pts) {
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double n = static_cast<double>(pts.size());
    double denom = n * sxx - sx * sx;
    if (denom <= 0) return f;
    f.eta = -(n * sxy - sx * sy) / denom;
    for (auto [lx, ly] : pts) f.C = std::max(f.C, std::exp(ly + f.eta * lx));
    return f;
}

struct tail_product {
    bool enough = false;  // at least 3 primes in the fit window
    double lower = 0.0;   // lower bound for prod_{p > p_cut} factor_p
    double eta = 0.0, C = 0.0;
    std::string note;
};

// Fits |factor_p - 1| ~ C p^{-eta} over primes in (p_cut/2, p_cut] and turns
// it into 1 - sum_{p > p_cut} C p^{-eta}. Extrapolated, not rigorous.
inline tail_product tail_product_bound(const std::vector<euler_factor>& factors, u64 p_cut) {
    tail_product r;
    std::vector<std::pair<double, double>> xy;
    bool all_at_least_one = true;
    for (const auto& f : factors) {
        if (f.p * 2 <= p_cut) continue;
        xy.emplace_back(static_cast<double>(f.p), f.value - 1.0);
        all_at_least_one = all_at_least_one && f.value >= 1.0;
    }
    if (xy.size() < 3) {
        r.note = "too few primes in the fit window; raise p_cut";
        return r;
    }
    r.enough = true;
    if (all_at_least_one) {
        r.lower = 1.0;
        r.note = "all fitted factors are >= 1; tail assumed to keep that sign";
        return r;
    }
    auto fit = fit_decay(xy);
    r.eta = fit.eta;
    r.C = fit.C;
    if (fit.points < 2) {
        r.lower = 1.0;
        r.note = "factors equal 1 across the fit window";
    } else if (fit.eta <= 1.0) {
        r.lower = -std::numeric_limits<double>::infinity();
        r.note = "fitted decay too slow for a summable tail";
    } else {
        r.lower = 1.0 - fit.C * std::pow(static_cast<double>(p_cut), 1.0 - fit.eta) / (fit.eta - 1.0);
        r.note = "tail bound from fitted |factor - 1| <= C p^-eta";
    }
    return r;
}

} // namespace detail

// Truncated singular series: sum_{q < q_cut} A(q) from exact prime-power
// values combined multiplicatively, and the Euler product over p <= p_cut.
inline singular_series_estimate singular_series(const diagonal_system& sys, u64 q_cut,
                                                const singular_series_options& opt = {}) {
    if (q_cut < 2) throw domain_error("singular_series: q_cut must be at least 2");
    singular_series_estimate est;
    est.q_cut = q_cut;
    est.p_cut = opt.p_cut;
    est.A.assign(q_cut, 0.0);
    est.A[1] = 1.0;
    est.table.entries.push_back({1, 1.0, big_int(1), factor_method::euler_combine});

    // A(p^e) for p^e < q_cut, exact via the telescoped counts.
    std::map<u64, double> prime_power_A;
    for (u64 p = 2; p < q_cut; ++p) {
        if (!is_prime(p)) continue;
        big_rational prev = 1;
        for (u64 pe = p;; pe *= p) {
            big_int M = count_M(sys, pe, opt.budget);
            big_rational g = big_rational(M * boost::multiprecision::pow(big_int(pe), static_cast<unsigned>(sys.t())),
                                          boost::multiprecision::pow(big_int(euler_phi(pe)),
                                                                     static_cast<unsigned>(sys.s())));
            double a = static_cast<double>(big_rational(g - prev));
            prev = g;
            prime_power_A[pe] = a;
            est.table.entries.push_back({pe, a, M, factor_method::from_M});
            if (pe > (q_cut - 1) / p) break;
        }
    }
    neumaier_sum<double> partial;
    partial += 1.0;
    for (u64 q = 2; q < q_cut; ++q) {
        double a = 1.0;
        auto f = factorize(q);
        for (auto [p, e] : f) a *= prime_power_A.at(ipow_u64(p, e));
        est.A[q] = a;
        if (f.size() > 1) est.table.entries.push_back({q, a, std::nullopt, factor_method::euler_combine});
        partial += a;
    }
    est.partial_sum = partial.value();
    std::sort(est.table.entries.begin(), est.table.entries.end(),
              [](const factor_entry& x, const factor_entry& y) { return x.q < y.q; });

    double prod = 1.0;
    for (u64 p = 2; p <= opt.p_cut; ++p) {
        if (!is_prime(p)) continue;
        est.factors.push_back(detail::euler_factor_at(sys, p, opt));
        prod *= est.factors.back().value;
    }
    est.euler_product = prod;

    const double kexp = 1.0 / (sys.max_degree() + 1.0);
    std::vector<std::pair<double, double>> xy;
    for (u64 q = 2; q < q_cut; ++q) {
        est.tail_constant_fit = std::max(est.tail_constant_fit, std::abs(est.A[q]) * std::pow(double(q), kexp));
        xy.emplace_back(static_cast<double>(q), est.A[q]);
    }
    auto fit = detail::fit_decay(xy);
    est.tail_exponent = fit.eta;
    if (fit.points < 2) {
        est.tail_bound = 0.0;  // no nonzero A(q) beyond q = 1 in range
    } else if (fit.eta <= 1.0) {
        est.tail_bound = std::numeric_limits<double>::infinity();
    } else {
        est.tail_bound = fit.C * std::pow(static_cast<double>(q_cut) - 1.0, 1.0 - fit.eta) / (fit.eta - 1.0);
    }
    auto tail = detail::tail_product_bound(est.factors, opt.p_cut);
    est.tail_product_lower = tail.lower;
    est.positive = prod > 0.0 && tail.enough && tail.lower > 0.5;
    for (const auto& f : est.factors) est.positive = est.positive && f.value > 0.0;
    return est;
}

struct hensel_record {
    u64 p = 0;
    unsigned gamma = 0, beta = 0;
    big_int M_gamma, M_beta;
    bool inequality_holds = false;  // M(p^beta) >= M(p^gamma) p^{(beta-gamma)(s-2)}
    std::optional<bool> nonsingular_witness;  // unset when the mod-p search was skipped
};

namespace detail {

// Rank of an integer matrix mod p (rows x cols), Gaussian elimination.
inline std::size_t rank_mod_p(std::vector<std::vector<u64>> m, u64 p) {
    std::size_t rank = 0;
    const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && m[piv][c] % p == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        u64 inv = powmod(m[rank][c], p - 2, p);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || m[r][c] % p == 0) continue;
            u64 f = mulmod(m[r][c], inv, p);
            for (std::size_t cc = 0; cc < cols; ++cc) m[r][cc] = (m[r][cc] + p - mulmod(f, m[rank][cc], p)) % p;
        }
        ++rank;
    }
    return rank;
}

} // namespace detail

// Jacobian (s x t) of the forms at m has rank t mod p for some unit solution m.
inline std::optional<bool> has_nonsingular_solution(const diagonal_system& sys, u64 p, long double budget = 2e7) {
    const std::size_t s = sys.s(), t = sys.t();
    if (std::pow(static_cast<long double>(p - 1), static_cast<long double>(s)) > budget) return std::nullopt;
    std::vector<u64> m(s, 1);
    while (true) {
        bool sol = true;
        for (std::size_t j = 0; j < t && sol; ++j) {
            u64 acc = 0;
            for (std::size_t i = 0; i < s; ++i)
                acc = (acc + mulmod(mod_floor(sys.row(i)[j], p), powmod(m[i], sys.k()[j], p), p)) % p;
            sol = acc == 0;
        }
        if (sol) {
            std::vector<std::vector<u64>> jac(s, std::vector<u64>(t));
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t j = 0; j < t; ++j)
                    jac[i][j] = mulmod(mulmod(mod_floor(sys.row(i)[j], p), sys.k()[j] % p, p),
                                       powmod(m[i], sys.k()[j] - 1, p), p);
            if (detail::rank_mod_p(jac, p) == t) return true;
        }
        std::size_t i = 0;
        while (i < s && ++m[i] == p) m[i++] = 1;
        if (i == s) return false;
    }
}

inline hensel_record hensel_check(const diagonal_system& sys, u64 p, unsigned gamma, unsigned beta,
                                  const local_budget& budget = {}) {
    if (!is_prime(p)) throw domain_error("hensel_check: p=" + std::to_string(p) + " is not prime");
    if (gamma < 1 || beta <= gamma) throw domain_error("hensel_check: need 1 <= gamma < beta");
    hensel_record r;
    r.p = p;
    r.gamma = gamma;
    r.beta = beta;
    r.M_gamma = count_M(sys, ipow_u64(p, gamma), budget);
    r.M_beta = count_M(sys, ipow_u64(p, beta), budget);
    long e = static_cast<long>(beta - gamma) * (static_cast<long>(sys.s()) - 2);
    if (e >= 0) {
        r.inequality_holds = r.M_beta >= r.M_gamma * boost::multiprecision::pow(big_int(p), static_cast<unsigned>(e));
    } else {
        r.inequality_holds =
            r.M_beta * boost::multiprecision::pow(big_int(p), static_cast<unsigned>(-e)) >= r.M_gamma;
    }
    r.nonsingular_witness = has_nonsingular_solution(sys, p);
    return r;
}

struct positivity_certificate {
    std::string verdict;  // "positive", "zero (local obstruction at p)", "inconclusive"
    std::optional<u64> obstruction;
    std::vector<euler_factor> factors;
    double tail_lower_bound = 0.0;  // fitted lower bound on prod_{p > p_cut} factor_p
    double tail_exponent = 0.0;
    double tail_constant = 0.0;
    std::string note;
};

// Local factors for p <= p_cut plus a fitted lower bound for the tail
// product. The tail part is an extrapolation, not a proof.
inline positivity_certificate certify_positivity(const diagonal_system& sys, u64 p_cut,
                                                  const singular_series_options& opt_in = {}) {
    positivity_certificate cert;
    singular_series_options opt = opt_in;
    opt.p_cut = p_cut;
    // Mod-p solvability first, so the reported obstruction is the least
    // prime with no unit solution at all.
    for (u64 p = 2; p <= p_cut; ++p) {
        if (!is_prime(p)) continue;
        auto v = local_solvability(sys, p);
        if (!v.solvable && v.mode == search_mode::exhaustive) {
            cert.verdict = "zero (local obstruction at " + std::to_string(p) + ")";
            cert.obstruction = p;
            cert.factors.push_back({p, 1, false, 0.0});
            return cert;
        }
    }
    for (u64 p = 2; p <= p_cut; ++p) {
        if (!is_prime(p)) continue;
        cert.factors.push_back(detail::euler_factor_at(sys, p, opt));
        if (cert.factors.back().value <= 0.0) {
            // solvable mod p but not mod p^L
            cert.verdict = "zero (local obstruction at " + std::to_string(p) + ")";
            cert.obstruction = p;
            return cert;
        }
    }
    auto tail = detail::tail_product_bound(cert.factors, p_cut);
    cert.tail_lower_bound = tail.lower;
    cert.tail_exponent = tail.eta;
    cert.tail_constant = tail.C;
    cert.note = tail.note;
    if (!tail.enough) {
        cert.verdict = "inconclusive";
        return cert;
    }
    cert.verdict = cert.tail_lower_bound > 0.5 ? "positive" : "inconclusive";
    return cert;
}

} // namespace hlm
