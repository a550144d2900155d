#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hlm/arith.hpp"
#include "hlm/error.hpp"
#include "hlm/rng.hpp"

namespace hlm {

// Coefficients and exponents of sum_i u_ij x_i^{k_j} = 0, (1 <= j <= t).
// Rows of u are variables, columns are equations.
struct raw_system {
    std::vector<std::vector<i64>> u;
    std::vector<unsigned> k;
};

class diagonal_system {
public:
    std::size_t s() const noexcept { return u_.size(); }
    std::size_t t() const noexcept { return k_.size(); }
    const std::vector<unsigned>& k() const noexcept { return k_; }
    const std::vector<std::vector<i64>>& u() const noexcept { return u_; }
    const std::vector<i64>& row(std::size_t i) const { return u_.at(i); }
    unsigned total_degree() const noexcept { return total_degree_; }
    unsigned max_degree() const noexcept { return max_degree_; }

    // k = (1, 2, ..., k_max) in some order.
    bool is_vinogradov() const {
        std::vector<unsigned> sorted = k_;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t j = 0; j < sorted.size(); ++j)
            if (sorted[j] != j + 1) return false;
        return true;
    }
    std::size_t vinogradov_threshold() const noexcept {
        return static_cast<std::size_t>(max_degree_) * max_degree_ + max_degree_ + 1;
    }

    // sum_i u_ij = 0 for every j: every all-equal tuple is a solution.
    bool admits_diagonal_family() const {
        for (std::size_t j = 0; j < t(); ++j) {
            i64 c = 0;
            for (const auto& r : u_) c += r[j];
            if (c != 0) return false;
        }
        return true;
    }

    raw_system raw() const { return {u_, k_}; }

    friend bool operator==(const diagonal_system&, const diagonal_system&) = default;
    friend diagonal_system validate(raw_system raw);

private:
    std::vector<std::vector<i64>> u_;
    std::vector<unsigned> k_;
    unsigned total_degree_ = 0;
    unsigned max_degree_ = 0;
};

// Checks the invariants and divides every column by its gcd.
inline diagonal_system validate(raw_system raw) {
    if (raw.k.empty()) throw validation_error("empty system: no equations (k is empty)");
    if (raw.u.empty()) throw validation_error("empty system: no variables (u is empty)");
    const std::size_t t = raw.k.size();
    for (std::size_t j = 0; j < t; ++j) {
        if (raw.k[j] == 0) throw validation_error("k[" + std::to_string(j) + "]: exponent must be >= 1");
        for (std::size_t j2 = 0; j2 < j; ++j2)
            if (raw.k[j2] == raw.k[j])
                throw validation_error("k[" + std::to_string(j) + "]: duplicate exponent " + std::to_string(raw.k[j]));
    }
    for (std::size_t i = 0; i < raw.u.size(); ++i) {
        if (raw.u[i].size() != t)
            throw validation_error("u[" + std::to_string(i) + "]: expected " + std::to_string(t) + " coefficients");
        for (std::size_t j = 0; j < t; ++j)
            if (raw.u[i][j] == 0)
                throw validation_error("u[" + std::to_string(i) + "][" + std::to_string(j) + "]: zero coefficient");
    }
    for (std::size_t j = 0; j < t; ++j) {
        i64 g = 0;
        for (const auto& r : raw.u) g = std::gcd(g, r[j]);
        for (auto& r : raw.u) r[j] /= g;
    }
    diagonal_system sys;
    sys.u_ = std::move(raw.u);
    sys.k_ = std::move(raw.k);
    sys.total_degree_ = std::accumulate(sys.k_.begin(), sys.k_.end(), 0u);
    sys.max_degree_ = *std::max_element(sys.k_.begin(), sys.k_.end());
    return sys;
}

inline diagonal_system validate(const diagonal_system& sys) { return validate(sys.raw()); }

// Convenience for the common single-equation case.
inline diagonal_system make_system(std::vector<i64> coeffs, unsigned k) {
    raw_system raw;
    raw.k = {k};
    for (i64 c : coeffs) raw.u.push_back({c});
    return validate(std::move(raw));
}

struct threshold_verdict {
    bool holds = false;
    long required = 0;  // 2 s_eps + 1
    long margin = 0;    // s - required
};

// s >= 2 s_eps + 1, with s_eps the user-supplied mean value exponent.
inline threshold_verdict threshold_check(long s, long s_eps) {
    threshold_verdict v;
    v.required = 2 * s_eps + 1;
    v.margin = s - v.required;
    v.holds = v.margin >= 0;
    return v;
}

enum class search_mode { exhaustive, randomized };

struct local_verdict {
    u64 p = 0;
    bool solvable = false;
    std::optional<std::vector<u64>> witness;
    search_mode mode = search_mode::exhaustive;
    u64 budget_used = 0;
};

namespace detail {

// Index of the residue vector (v_0, ..., v_{t-1}) mod p, base-p digits.
inline std::vector<std::vector<u64>> unit_contributions(const diagonal_system& sys, u64 q) {
    const std::size_t t = sys.t();
    std::vector<u64> base(t, 1);
    for (std::size_t j = 1; j < t; ++j) base[j] = base[j - 1] * q;
    std::vector<std::vector<u64>> contrib(sys.s());
    for (std::size_t i = 0; i < sys.s(); ++i) {
        contrib[i].assign(q, UINT64_MAX);
        for (u64 m = 1; m < q || (q == 1 && m == 1); ++m) {
            if (std::gcd(m, q) != 1) continue;
            u64 idx = 0;
            for (std::size_t j = 0; j < t; ++j)
                idx += mulmod(mod_floor(sys.row(i)[j], q), powmod(m, sys.k()[j], q), q) * base[j];
            contrib[i][m % q] = idx;
            if (q == 1) break;
        }
    }
    return contrib;
}

// Cellwise addition of residue vectors stored as base-q digits.
inline u64 add_cells(u64 a, u64 b, u64 q, std::size_t t) {
    u64 r = 0, scale = 1;
    for (std::size_t j = 0; j < t; ++j) {
        u64 d = (a % q + b % q) % q;
        r += d * scale;
        scale *= q;
        a /= q;
        b /= q;
    }
    return r;
}

inline u64 sub_cells(u64 a, u64 b, u64 q, std::size_t t) {
    u64 r = 0, scale = 1;
    for (std::size_t j = 0; j < t; ++j) {
        u64 d = (a % q + q - b % q) % q;
        r += d * scale;
        scale *= q;
        a /= q;
        b /= q;
    }
    return r;
}

} // namespace detail

struct local_options {
    u64 exhaustive_cell_limit = u64{1} << 22;  // p^t reachable-set cells
    long double exhaustive_work_limit = 2e9;     // s * p^t * (p - 1) cell updates
    u64 random_budget = 10'000'000;
    std::uint64_t seed = 0;
};

// Does the system have a solution in units modulo the prime p? Exhaustive
// mode propagates the reachable set of partial sums one variable at a time
// and reconstructs a witness backwards; randomized mode samples unit tuples.
inline local_verdict local_solvability(const diagonal_system& sys, u64 p, const local_options& opt = {}) {
    if (!is_prime(p)) throw domain_error("local_solvability: p=" + std::to_string(p) + " is not prime");
    const std::size_t t = sys.t(), s = sys.s();
    local_verdict v;
    v.p = p;
    long double cells_ld = std::pow(static_cast<long double>(p), static_cast<long double>(t));
    if (cells_ld <= opt.exhaustive_cell_limit && cells_ld * (p - 1) * s <= opt.exhaustive_work_limit) {
        v.mode = search_mode::exhaustive;
        const u64 cells = static_cast<u64>(cells_ld);
        auto contrib = detail::unit_contributions(sys, p);
        std::vector<std::vector<bool>> reach(s + 1, std::vector<bool>(cells, false));
        reach[0][0] = true;
        for (std::size_t i = 0; i < s; ++i) {
            for (u64 c = 0; c < cells; ++c) {
                if (!reach[i][c]) continue;
                for (u64 m = 1; m < p; ++m) {
                    reach[i + 1][detail::add_cells(c, contrib[i][m], p, t)] = true;
                    ++v.budget_used;
                }
            }
        }
        v.solvable = reach[s][0];
        if (v.solvable) {
            std::vector<u64> w(s);
            u64 target = 0;
            for (std::size_t i = s; i-- > 0;) {
                for (u64 m = 1; m < p; ++m) {
                    u64 prev = detail::sub_cells(target, contrib[i][m], p, t);
                    if (reach[i][prev]) {
                        w[i] = m;
                        target = prev;
                        break;
                    }
                }
            }
            v.witness = std::move(w);
        }
        return v;
    }
    v.mode = search_mode::randomized;
    rng gen(opt.seed);
    std::vector<u64> m(s);
    for (u64 trial = 0; trial < opt.random_budget; ++trial) {
        ++v.budget_used;
        for (auto& x : m) x = 1 + gen.below(p - 1);
        bool ok = true;
        for (std::size_t j = 0; j < t && ok; ++j) {
            u64 acc = 0;
            for (std::size_t i = 0; i < s; ++i)
                acc = (acc + mulmod(mod_floor(sys.row(i)[j], p), powmod(m[i], sys.k()[j], p), p)) % p;
            ok = acc == 0;
        }
        if (ok) {
            v.solvable = true;
            v.witness = m;
            return v;
        }
    }
    return v;
}

// Re-checks a unit witness against all t congruences mod q.
inline bool verify_witness(const diagonal_system& sys, u64 q, const std::vector<u64>& w) {
    if (w.size() != sys.s()) return false;
    for (u64 x : w)
        if (std::gcd(x, q) != 1) return false;
    for (std::size_t j = 0; j < sys.t(); ++j) {
        u64 acc = 0;
        for (std::size_t i = 0; i < sys.s(); ++i)
            acc = (acc + mulmod(mod_floor(sys.row(i)[j], q), powmod(w[i], sys.k()[j], q), q)) % q;
        if (acc != 0) return false;
    }
    return true;
}

// Residuals sum_i u_ij x_i^{k_j}.
inline std::vector<double> real_residuals(const diagonal_system& sys, const std::vector<double>& x) {
    std::vector<double> r(sys.t(), 0.0);
    for (std::size_t j = 0; j < sys.t(); ++j)
        for (std::size_t i = 0; i < sys.s(); ++i)
            r[j] += static_cast<double>(sys.row(i)[j]) * std::pow(x[i], static_cast<double>(sys.k()[j]));
    return r;
}

// Search for a real point in the open box (0,1)^s with all residuals below
// tol. Each attempt starts from a random point and runs damped Gauss-Newton
// in logistic coordinates x = 1/(1+exp(-z)), which keep x inside the box.
// A miss is "not found", never a proof of insolubility.
inline std::optional<std::vector<double>> real_solution_probe(const diagonal_system& sys, int attempts,
                                                              std::uint64_t seed, double tol = 1e-10) {
    const std::size_t s = sys.s(), t = sys.t();
    for (int a = 0; a < attempts; ++a) {
        rng gen(derive_seed(seed, static_cast<std::uint64_t>(a)));
        std::vector<double> z(s), x(s);
        for (auto& zi : z) zi = 1.5 * gen.normal();
        auto to_x = [&] {
            for (std::size_t i = 0; i < s; ++i) x[i] = 1.0 / (1.0 + std::exp(-z[i]));
        };
        auto norm2 = [](const std::vector<double>& r) {
            double n = 0;
            for (double v : r) n += v * v;
            return n;
        };
        to_x();
        std::vector<double> r = real_residuals(sys, x);
        double lambda = 1e-3;
        for (int it = 0; it < 200; ++it) {
            double rmax = 0;
            for (double v : r) rmax = std::max(rmax, std::abs(v));
            bool interior = std::all_of(x.begin(), x.end(), [](double xi) { return xi > 0.0 && xi < 1.0; });
            if (rmax <= tol && interior) return x;
            // Jacobian dr_j/dz_i = u_ij k_j x_i^{k_j - 1} x_i (1 - x_i).
            std::vector<std::vector<double>> jac(t, std::vector<double>(s));
            for (std::size_t j = 0; j < t; ++j)
                for (std::size_t i = 0; i < s; ++i)
                    jac[j][i] = static_cast<double>(sys.row(i)[j]) * sys.k()[j] *
                                std::pow(x[i], static_cast<double>(sys.k()[j]) - 1.0) * x[i] * (1.0 - x[i]);
            // Minimum-norm step: dz = -J^T (J J^T + lambda I)^{-1} r.
            std::vector<std::vector<double>> a_mat(t, std::vector<double>(t + 1));
            for (std::size_t j = 0; j < t; ++j) {
                for (std::size_t l = 0; l < t; ++l) {
                    double acc = 0;
                    for (std::size_t i = 0; i < s; ++i) acc += jac[j][i] * jac[l][i];
                    a_mat[j][l] = acc + (j == l ? lambda : 0.0);
                }
                a_mat[j][t] = r[j];
            }
            for (std::size_t c = 0; c < t; ++c) {
                std::size_t piv = c;
                for (std::size_t rr = c + 1; rr < t; ++rr)
                    if (std::abs(a_mat[rr][c]) > std::abs(a_mat[piv][c])) piv = rr;
                std::swap(a_mat[c], a_mat[piv]);
                if (a_mat[c][c] == 0.0) break;
                for (std::size_t rr = 0; rr < t; ++rr) {
                    if (rr == c) continue;
                    double f = a_mat[rr][c] / a_mat[c][c];
                    for (std::size_t cc = c; cc <= t; ++cc) a_mat[rr][cc] -= f * a_mat[c][cc];
                }
            }
            std::vector<double> y(t);
            for (std::size_t j = 0; j < t; ++j) y[j] = a_mat[j][j] != 0.0 ? a_mat[j][t] / a_mat[j][j] : 0.0;
            std::vector<double> dz(s, 0.0);
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t j = 0; j < t; ++j) dz[i] -= jac[j][i] * y[j];
            std::vector<double> z_try(s), x_save = x;
            for (std::size_t i = 0; i < s; ++i) z_try[i] = z[i] + dz[i];
            std::swap(z, z_try);
            to_x();
            std::vector<double> r_try = real_residuals(sys, x);
            if (norm2(r_try) < norm2(r)) {
                r = std::move(r_try);
                lambda = std::max(lambda * 0.1, 1e-12);
            } else {
                std::swap(z, z_try);
                x = x_save;
                lambda *= 10.0;
                if (lambda > 1e12) break;
            }
        }
    }
    return std::nullopt;
}

} // namespace hlm
