#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <span>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hlm/arith.hpp"
#include "hlm/error.hpp"
#include "hlm/expsums.hpp"
#include "hlm/phase.hpp"
#include "hlm/rng.hpp"
#include "hlm/sysmodel.hpp"

namespace hlm {

// rho = beta + 2 pi i tau
struct rho_exponent {
    double beta = 1.0;
    double tau = 0.0;
    cplx value() const { return {beta, 2.0 * std::numbers::pi * tau}; }
};

struct quad_result {
    cplx value{0.0, 0.0};
    double abs_error_estimate = 0.0;
    std::size_t subdivisions = 0;
};

struct quad_options {
    double rel_tol = 1e-13;
    std::size_t max_subdivisions = 1'000'000;
    double panel_turns = 0.25;  // panel length in units of the local wavelength
};

namespace detail {

constexpr double two_pi = 2.0 * std::numbers::pi;

// G7/K15 on [a, b]; returns the Kronrod value and |K15 - G7|.
template <class F>
std::pair<cplx, double> gk15(F&& f, double a, double b) {
    using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
    using g = boost::math::quadrature::gauss<double, 7>;
    static const auto& xk = gk::abscissa();
    static const auto& wk = gk::weights();
    static const auto& wg = g::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fc = f(c);
    cplx k = wk[0] * fc, gsum = wg[0] * fc;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        cplx s = f(c - h * xk[i]) + f(c + h * xk[i]);
        k += wk[i] * s;
        if (i % 2 == 0) gsum += wg[i / 2] * s;
    }
    return {k * h, std::abs((k - gsum) * h)};
}

// phi(x) = sum_{d>=1} coef[d-1] x^d
inline double poly_phase(const std::vector<double>& coef, double x) {
    double acc = 0.0;
    for (std::size_t d = coef.size(); d-- > 0;) acc = (acc + coef[d]) * x;
    return acc;
}

inline double poly_slope_bound(const std::vector<double>& coef, double x) {
    double acc = 0.0, xp = 1.0;
    for (std::size_t d = 0; d < coef.size(); ++d) {
        acc += (d + 1.0) * std::abs(coef[d]) * xp;
        xp *= x;
    }
    return acc;
}

} // namespace detail

// I(X; theta, rho) = int_0^X e(theta_1 x + ... + theta_k x^k) x^{rho - 1} dx.
// [0, x0] by the power series of e(phi) integrated termwise against x^{rho-1};
// [x0, X] by G7/K15 panels no longer than a fraction of the local wavelength
// of phi'(x) + tau/x and graded geometrically away from 0.
inline quad_result exp_integral_I(double X, const std::vector<double>& theta, rho_exponent rho,
                                  const quad_options& opt = {}) {
    if (!std::isfinite(X) || !std::isfinite(rho.beta) || !std::isfinite(rho.tau))
        throw domain_error("exp_integral_I: non-finite input");
    for (double th : theta)
        if (!std::isfinite(th)) throw domain_error("exp_integral_I: non-finite theta");
    if (!(rho.beta > 0.0)) throw domain_error("exp_integral_I: beta must be positive");
    if (!(X >= 0.0)) throw domain_error("exp_integral_I: X must be non-negative");
    quad_result res;
    if (X == 0.0) return res;
    const cplx r = rho.value();

    // Series region: 2 pi |phi| <= 1/2 on [0, x0].
    double x0 = std::min(1.0, X) / 2.0;
    while (detail::two_pi * detail::poly_slope_bound(theta, x0) * x0 > 0.5) x0 *= 0.5;
    {
        const std::size_t k = theta.size();
        std::vector<cplx> c{cplx(1.0, 0.0)};
        const cplx lx0 = std::log(x0);
        cplx total = 0.0;
        double last = 0.0;
        double xn = 1.0;
        std::size_t small_run = 0;  // zero coefficients are common (theta_1 = 0), so wait for k in a row
        for (std::size_t n = 0; n < 400; ++n) {
            if (n > 0) {
                cplx cn = 0.0;
                for (std::size_t j = 1; j <= std::min(k, n); ++j)
                    cn += static_cast<double>(j) * theta[j - 1] * c[n - j];
                cn *= cplx(0.0, detail::two_pi) / static_cast<double>(n);
                c.push_back(cn);
                xn *= x0;
            }
            cplx term = c[n] * std::exp((static_cast<double>(n) + r) * lx0) / (static_cast<double>(n) + r);
            total += term;
            const double mag = std::abs(c[n]) * xn;
            last = std::max(last, mag);
            if (mag < 1e-18) {
                if (++small_run >= std::max<std::size_t>(k, 1) && n > k) break;
            } else {
                small_run = 0;
                last = 0.0;
            }
        }
        res.value += total;
        res.abs_error_estimate += last * std::pow(x0, rho.beta) + 1e-16 * std::abs(total);
    }

    const double rm1 = rho.beta - 1.0;
    auto f = [&](double x) {
        double ph = detail::poly_phase(theta, x);
        ph -= std::floor(ph);
        double lx = std::log(x);
        double turn = ph + rho.tau * lx;
        turn -= std::floor(turn);
        return std::exp(rm1 * lx) * std::polar(1.0, detail::two_pi * turn);
    };
    const double scale = std::max(std::pow(X, rho.beta), 1e-300);
    const double tol = opt.rel_tol * scale;
    // Recursive bisection of a panel whose G7/K15 difference is too large.
    struct panel {
        double a, b;
        int depth;
    };
    std::vector<panel> stack;
    double x = x0;
    complex_sum acc;
    while (x < X) {
        double h = std::min(X - x, x);  // grading near the endpoint singularity
        for (int it = 0; it < 3; ++it) {
            double fb = detail::poly_slope_bound(theta, x + h) + std::abs(rho.tau) / x;
            if (fb * h > opt.panel_turns) h = opt.panel_turns / fb;
        }
        double b = (X - (x + h) < 1e-12 * X) ? X : x + h;
        stack.push_back({x, b, 0});
        while (!stack.empty()) {
            panel p = stack.back();
            stack.pop_back();
            auto [v, e] = detail::gk15(f, p.a, p.b);
            ++res.subdivisions;
            if (res.subdivisions > opt.max_subdivisions)
                throw capacity_error("exp_integral_I: subdivision limit reached");
            double local_tol = tol * (p.b - p.a) / X;
            // phase rounding: |phi| carries relative error ~eps, so f does too
            const double ph_mag = std::abs(detail::poly_phase(theta, p.b)) + std::abs(rho.tau * std::log(p.b)) + 1.0;
            const double noise = 32.0 * std::numeric_limits<double>::epsilon() * detail::two_pi * ph_mag *
                                 (p.b - p.a) * std::pow(rm1 < 0 ? p.a : p.b, rm1);
            local_tol = std::max(local_tol, noise);
            if (e > local_tol && p.depth < 30 && e > 1e-15 * std::abs(v)) {
                double m = 0.5 * (p.a + p.b);
                stack.push_back({m, p.b, p.depth + 1});
                stack.push_back({p.a, m, p.depth + 1});
                continue;
            }
            acc += v;
            res.abs_error_estimate += e;
        }
        x = b;
    }
    res.value += acc.value();
    return res;
}

// Envelope: X^beta / (1 + sum_j X^j |theta_j| + |tau|)^{1/(1+k)}
inline double i_envelope(double X, const std::vector<double>& theta, rho_exponent rho) {
    double d = 1.0 + std::abs(rho.tau);
    double xp = 1.0;
    for (double th : theta) {
        xp *= X;
        d += xp * std::abs(th);
    }
    return std::pow(X, rho.beta) / std::pow(d, 1.0 / (1.0 + theta.size()));
}

struct i_audit_ranges {
    std::vector<unsigned> k_choices{1, 2, 3};
    double X_lo = 1.0, X_hi = 1e3;           // log-uniform
    double scaled_lo = 1e-3, scaled_hi = 1e3;  // X^j |theta_j| and |tau|, log-uniform
};

struct i_audit_record {
    std::size_t samples = 0;
    double sup = 0.0;
    double p99 = 0.0;
    std::vector<double> ratios;  // in sample order
};

inline double log_uniform(rng& g, double lo, double hi) {
    return std::exp(g.uniform(std::log(lo), std::log(hi)));
}

// Sample i depends only on (seed, i), so a run with 2N samples extends the
// run with N.
inline i_audit_record i_bound_audit(std::size_t samples, std::uint64_t seed, const i_audit_ranges& ranges = {},
                                    const quad_options& qopt = {1e-10, 1'000'000, 0.25}) {
    if (samples < 100) throw domain_error("i_bound_audit: need at least 100 samples");
    if (ranges.k_choices.empty()) throw domain_error("i_bound_audit: no k choices");
    i_audit_record rec;
    rec.samples = samples;
    rec.ratios.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        rng g(derive_seed(seed, i));
        unsigned k = ranges.k_choices[g.below(ranges.k_choices.size())];
        double X = log_uniform(g, ranges.X_lo, ranges.X_hi);
        std::vector<double> theta(k);
        for (unsigned j = 1; j <= k; ++j) {
            double sc = log_uniform(g, ranges.scaled_lo, ranges.scaled_hi);
            double sign = g.uniform() < 0.5 ? -1.0 : 1.0;
            theta[j - 1] = sign * sc / std::pow(X, static_cast<double>(j));
        }
        rho_exponent rho;
        rho.beta = g.uniform((k + 1.0) / (k + 2.0), 1.0);
        rho.tau = (g.uniform() < 0.5 ? -1.0 : 1.0) * log_uniform(g, ranges.scaled_lo, ranges.scaled_hi);
        auto I = exp_integral_I(X, theta, rho, qopt);
        rec.ratios.push_back(std::abs(I.value) / i_envelope(X, theta, rho));
    }
    std::vector<double> sorted = rec.ratios;
    std::sort(sorted.begin(), sorted.end());
    rec.sup = sorted.back();
    rec.p99 = sorted[std::min(sorted.size() - 1, static_cast<std::size_t>(std::ceil(0.99 * sorted.size())) - 1)];
    return rec;
}

// v(gamma) = int_0^1 e(sum_j gamma_j u_ij y^{k_j}) dy
inline cplx unit_profile(std::span<const double> gamma, std::span<const i64> row, std::span<const unsigned> k) {
    if (gamma.size() != k.size() || row.size() != k.size())
        throw domain_error("unit_profile: gamma, row and k must have equal length");
    unsigned kmax = *std::max_element(k.begin(), k.end());
    std::vector<double> coef(kmax, 0.0);
    bool zero = true;
    for (std::size_t j = 0; j < k.size(); ++j) {
        if (!std::isfinite(gamma[j])) throw domain_error("unit_profile: non-finite gamma");
        coef[k[j] - 1] += gamma[j] * static_cast<double>(row[j]);
        zero = zero && coef[k[j] - 1] == 0.0;
    }
    if (zero) return {1.0, 0.0};
    if (kmax == 1) {
        // (e(c) - 1) / (2 pi i c), with the series for small |c|
        double c = coef[0];
        if (std::abs(c) < 1e-4) {
            cplx z(0.0, detail::two_pi * c);
            return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
        }
        double fc = c - std::floor(c);
        return (std::polar(1.0, detail::two_pi * fc) - 1.0) / cplx(0.0, detail::two_pi * c);
    }
    return exp_integral_I(1.0, coef, {1.0, 0.0}, {1e-13, 1'000'000, 0.25}).value;
}

enum class integral_method { tensor, qmc };

struct singular_integral_options {
    integral_method method = integral_method::tensor;
    double panels_per_unit = 2.0;      // scaled by max |u_ij|
    long double node_budget = 4e6;     // tensor grid nodes (fine level)
    std::size_t qmc_points = 4096;     // per replicate
    std::size_t qmc_replicates = 8;
    double tolerance = 1e-3;           // requested half-width
    std::uint64_t seed = 0;
    std::vector<double> ladder;        // empty: gamma_cut / 8, / 4, / 2, 1
};

struct c_j_point {
    double gamma_cut = 0.0;
    double estimate = 0.0;
    double error = 0.0;
    double imag = 0.0;
};

struct c_j_estimate {
    double value = 0.0;
    double error = 0.0;
    double imag = 0.0;
    bool partial = false;  // error bar above the requested tolerance, or budget hit
    std::string note;
    std::vector<c_j_point> ladder;
};

namespace detail {

struct profile_rows {
    std::vector<std::vector<i64>> rows;
    std::vector<unsigned> mult;
};

inline profile_rows distinct_rows(const diagonal_system& sys) {
    std::map<std::vector<i64>, unsigned> m;
    for (const auto& r : sys.u()) ++m[r];
    profile_rows pr;
    for (const auto& [r, n] : m) {
        pr.rows.push_back(r);
        pr.mult.push_back(n);
    }
    return pr;
}

inline cplx profile_product(const profile_rows& pr, std::span<const double> gamma, std::span<const unsigned> k) {
    cplx prod{1.0, 0.0};
    for (std::size_t r = 0; r < pr.rows.size(); ++r) {
        cplx v = unit_profile(gamma, pr.rows[r], k);
        for (unsigned e = 0; e < pr.mult[r]; ++e) prod *= v;
    }
    return prod;
}

// Composite 8-point Gauss-Legendre grid on [-G, G] with n_panels panels.
inline void gl_grid(double G, std::size_t n_panels, std::vector<double>& x, std::vector<double>& w) {
    using gl = boost::math::quadrature::gauss<double, 8>;
    const auto& t = gl::abscissa();
    const auto& wt = gl::weights();
    x.clear();
    w.clear();
    const double h = 2.0 * G / static_cast<double>(n_panels);
    for (std::size_t p = 0; p < n_panels; ++p) {
        double c = -G + (p + 0.5) * h;
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (double sgn : {-1.0, 1.0}) {
                x.push_back(c + sgn * 0.5 * h * t[i]);
                w.push_back(0.5 * h * wt[i]);
            }
        }
    }
}

inline std::pair<cplx, long double> tensor_integral(const diagonal_system& sys, const profile_rows& pr, double G,
                                                    std::size_t n_panels, long double budget) {
    const std::size_t t = sys.t();
    std::vector<double> x, w;
    gl_grid(G, n_panels, x, w);
    long double nodes = std::pow(static_cast<long double>(x.size()), static_cast<long double>(t));
    if (nodes > budget) return {cplx(0.0, 0.0), nodes};
    complex_sum acc;
    std::vector<std::size_t> idx(t, 0);
    std::vector<double> gamma(t);
    while (true) {
        double wt = 1.0;
        for (std::size_t j = 0; j < t; ++j) {
            gamma[j] = x[idx[j]];
            wt *= w[idx[j]];
        }
        acc += wt * profile_product(pr, gamma, sys.k());
        std::size_t j = 0;
        while (j < t && ++idx[j] == x.size()) idx[j++] = 0;
        if (j == t) break;
    }
    return {acc.value(), nodes};
}

// Halton point i in base primes, shifted mod 1.
inline double halton(std::size_t i, u64 base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

} // namespace detail

// c_J(G) = int_{|gamma_j| <= G} prod_i v_i(gamma) d gamma, so that the
// singular integral over |theta_j| <= G P^{-k_j} equals c_J(G) P^{s-K}.
inline c_j_estimate singular_integral_normalized(const diagonal_system& sys, double gamma_cut,
                                                 const singular_integral_options& opt = {}) {
    if (!(gamma_cut >= 0.0) || !std::isfinite(gamma_cut))
        throw domain_error("singular_integral: gamma_cut must be finite and non-negative");
    c_j_estimate est;
    std::vector<double> ladder = opt.ladder;
    if (ladder.empty())
        for (double f : {0.125, 0.25, 0.5, 1.0})
            if (gamma_cut * f >= 1.0 || f == 1.0) ladder.push_back(gamma_cut * f);
    if (gamma_cut == 0.0) {
        est.ladder.push_back({0.0, 0.0, 0.0, 0.0});
        return est;
    }
    auto pr = detail::distinct_rows(sys);
    i64 umax = 1;
    for (const auto& r : sys.u())
        for (i64 c : r) umax = std::max<i64>(umax, c < 0 ? -c : c);
    const std::size_t t = sys.t();

    for (double G : ladder) {
        c_j_point pt;
        pt.gamma_cut = G;
        if (G <= 0.0) {
            est.ladder.push_back(pt);
            continue;
        }
        if (opt.method == integral_method::tensor) {
            if (t > 3) throw domain_error("singular_integral: tensor method supports t <= 3");
            std::size_t panels =
                std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(2.0 * G * opt.panels_per_unit * umax)));
            auto [coarse, n1] = detail::tensor_integral(sys, pr, G, panels, opt.node_budget);
            auto [fine, n2] = detail::tensor_integral(sys, pr, G, 2 * panels, opt.node_budget);
            if (n1 > opt.node_budget || n2 > opt.node_budget) {
                est.partial = true;
                est.note = "tensor grid exceeds node budget at gamma_cut=" + std::to_string(G);
                if (n1 > opt.node_budget) {
                    pt.estimate = std::numeric_limits<double>::quiet_NaN();
                    pt.error = std::numeric_limits<double>::infinity();
                } else {
                    pt.estimate = coarse.real();
                    pt.imag = coarse.imag();
                    pt.error = std::numeric_limits<double>::infinity();
                }
            } else {
                pt.estimate = fine.real();
                pt.imag = fine.imag();
                pt.error = std::abs(fine - coarse);
            }
        } else {
            static const u64 bases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
            if (t > std::size(bases)) throw domain_error("singular_integral: QMC supports t <= 12");
            const double vol = std::pow(2.0 * G, static_cast<double>(t));
            std::vector<double> reps;
            double im = 0.0;
            std::vector<double> gamma(t);
            for (std::size_t rep = 0; rep < opt.qmc_replicates; ++rep) {
                rng g(derive_seed(opt.seed, rep));
                std::vector<double> shift(t);
                for (auto& s : shift) s = g.uniform();
                complex_sum acc;
                for (std::size_t i = 1; i <= opt.qmc_points; ++i) {
                    for (std::size_t j = 0; j < t; ++j) {
                        double u = detail::halton(i, bases[j]) + shift[j];
                        u -= std::floor(u);
                        gamma[j] = -G + 2.0 * G * u;
                    }
                    acc += detail::profile_product(pr, gamma, sys.k());
                }
                cplx v = acc.value() * (vol / static_cast<double>(opt.qmc_points));
                reps.push_back(v.real());
                im += v.imag();
            }
            double mean = 0.0;
            for (double v : reps) mean += v;
            mean /= static_cast<double>(reps.size());
            double var = 0.0;
            for (double v : reps) var += (v - mean) * (v - mean);
            var /= std::max<double>(1.0, static_cast<double>(reps.size()) - 1.0);
            pt.estimate = mean;
            pt.imag = im / static_cast<double>(reps.size());
            pt.error = 2.0 * std::sqrt(var / static_cast<double>(reps.size()));
        }
        est.ladder.push_back(pt);
    }
    const auto& top = est.ladder.back();
    est.value = top.estimate;
    est.error = top.error;
    est.imag = top.imag;
    if (!(est.error <= opt.tolerance)) {
        est.partial = true;
        if (est.note.empty()) est.note = "error bar above requested tolerance";
    }
    return est;
}

// gamma_cut, estimate, error
inline std::string to_csv(const c_j_estimate& est) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "gamma_cut,estimate,error\n";
    for (const auto& p : est.ladder) out << p.gamma_cut << ',' << p.estimate << ',' << p.error << '\n';
    return out.str();
}

} // namespace hlm
