#pragma once

#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include "hlm/arith.hpp"
#include "hlm/phase.hpp"

namespace hlm {

// (Z/q)^* as a product of cyclic components, with a discrete-log table per
// component. Odd prime powers contribute one component; 4 contributes <3>;
// 2^e with e >= 3 contributes <-1> x <5>.
class character_group {
public:
    struct component {
        u64 modulus;     // prime power this component lives on
        u64 order;       // cyclic order n_c
        u64 generator;   // generator mod `modulus` (or -1 for the sign part of 2^e)
    };

    explicit character_group(u64 q) : q_(q) {
        if (q == 0) throw domain_error("character_group: modulus must be positive");
        for (auto [p, e] : factorize(q)) {
            u64 pe = ipow_u64(p, e);
            if (p == 2) {
                if (e == 2) comps_.push_back({pe, 2, 3});
                if (e >= 3) {
                    comps_.push_back({pe, 2, pe - 1});
                    comps_.push_back({pe, pe / 4, 5});
                }
            } else {
                comps_.push_back({pe, pe / p * (p - 1), primitive_root(pe)});
            }
        }
        exponent_ = 1;
        for (const auto& c : comps_) exponent_ = lcm_checked(exponent_, c.order);
        // logs_[r * ncomp + c] = discrete log of r in component c.
        logs_.assign(q_ * comps_.size(), 0);
        for (std::size_t c = 0; c < comps_.size(); ++c) {
            const auto& comp = comps_[c];
            std::vector<u64> dlog(comp.modulus, UINT64_MAX);
            bool two_adic_pair = (comp.modulus % 2 == 0) && comp.modulus >= 8;
            if (two_adic_pair && comp.order == 2 && comp.generator == comp.modulus - 1) {
                // sign part: r = (-1)^a 5^b, a = 0 iff r = 1 mod 4
                for (u64 r = 1; r < comp.modulus; r += 2) dlog[r] = (r % 4 == 1) ? 0 : 1;
            } else if (two_adic_pair) {
                u64 x = 1;
                for (u64 b = 0; b < comp.order; ++b) {
                    dlog[x] = b;
                    dlog[comp.modulus - x] = b;
                    x = mulmod(x, 5, comp.modulus);
                }
            } else {
                u64 x = 1 % comp.modulus;
                for (u64 b = 0; b < comp.order; ++b) {
                    dlog[x] = b;
                    x = mulmod(x, comp.generator, comp.modulus);
                }
            }
            for (u64 r = 0; r < q_; ++r) {
                u64 l = dlog[r % comp.modulus];
                logs_[r * comps_.size() + c] = (l == UINT64_MAX) ? 0 : l;
            }
        }
        roots_.resize(exponent_);
        for (u64 j = 0; j < exponent_; ++j)
            roots_[j] = std::polar(1.0, static_cast<double>(2.0L * std::numbers::pi_v<long double> * j / exponent_));
        units_.assign(q_, false);
        for (u64 r = 0; r < q_; ++r) units_[r] = std::gcd(r, q_) == 1;
    }

    u64 modulus() const noexcept { return q_; }
    u64 exponent() const noexcept { return exponent_; }
    const std::vector<component>& components() const noexcept { return comps_; }
    u64 order() const noexcept {
        u64 n = 1;
        for (const auto& c : comps_) n *= c.order;
        return n;
    }
    bool is_unit(u64 r) const { return units_[r % q_]; }
    u64 log(u64 r, std::size_t c) const { return logs_[(r % q_) * comps_.size() + c]; }
    const cplx& root(u64 j) const { return roots_[j % exponent_]; }

private:
    u64 q_;
    std::vector<component> comps_;
    u64 exponent_ = 1;
    std::vector<u64> logs_;
    std::vector<cplx> roots_;
    std::vector<bool> units_;
};

// chi(r) = prod_c e(index_c * log_c(r) / n_c) on units, 0 elsewhere.
class dirichlet_character {
public:
    dirichlet_character(std::shared_ptr<const character_group> g, std::vector<u64> index)
        : group_(std::move(g)), index_(std::move(index)) {
        const auto& comps = group_->components();
        for (std::size_t c = 0; c < comps.size(); ++c)
            weight_.push_back(index_[c] % comps[c].order * (group_->exponent() / comps[c].order));
    }

    u64 modulus() const noexcept { return group_->modulus(); }
    const std::vector<u64>& index() const noexcept { return index_; }
    bool is_principal() const noexcept {
        for (u64 x : index_)
            if (x != 0) return false;
        return true;
    }

    // Exponent j with chi(r) = e(j / exponent) for a unit r.
    u64 phase_index(i64 n) const {
        u64 r = mod_floor(n, group_->modulus());
        u64 j = 0;
        for (std::size_t c = 0; c < weight_.size(); ++c)
            j = (j + mulmod(weight_[c], group_->log(r, c), group_->exponent())) % group_->exponent();
        return j;
    }

    cplx operator()(i64 n) const {
        u64 r = mod_floor(n, group_->modulus());
        if (!group_->is_unit(r)) return {0.0, 0.0};
        return group_->root(phase_index(n));
    }

    dirichlet_character conj() const {
        std::vector<u64> idx = index_;
        const auto& comps = group_->components();
        for (std::size_t c = 0; c < comps.size(); ++c) idx[c] = (comps[c].order - idx[c] % comps[c].order) % comps[c].order;
        return dirichlet_character(group_, std::move(idx));
    }

private:
    std::shared_ptr<const character_group> group_;
    std::vector<u64> index_;
    std::vector<u64> weight_;
};

// All phi(q) characters mod q, principal first, indices in lexicographic order.
inline std::vector<dirichlet_character> characters(u64 q) {
    auto g = std::make_shared<const character_group>(q);
    const auto& comps = g->components();
    std::vector<dirichlet_character> out;
    std::vector<u64> idx(comps.size(), 0);
    while (true) {
        out.emplace_back(g, idx);
        std::size_t c = comps.size();
        while (c > 0) {
            --c;
            if (++idx[c] < comps[c].order) break;
            idx[c] = 0;
            if (c == 0) return out;
        }
        if (comps.empty()) return out;
    }
}

inline dirichlet_character principal_character(u64 q) {
    auto g = std::make_shared<const character_group>(q);
    return dirichlet_character(g, std::vector<u64>(g->components().size(), 0));
}

} // namespace hlm
