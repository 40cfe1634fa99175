#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "permfree/errors.hpp"
#include "permfree/monomial.hpp"
#include "permfree/perm.hpp"
#include "permfree/rational.hpp"

// Brute-force oracle for E(tr alpha) and E(tr alpha * tr beta): enumerate the
// entry-index sums of the trace literally, average over all permutation
// tuples, and reduce Gaussian entry products with Wick's lemma applied to the
// raw label multisets. Deliberately shares no code with the tau-sum formulas
// it is used to check. Tiny sizes only.

namespace permfree::oracle {

namespace detail {

/// Label of one Gaussian entry f_{r; x, y}.
struct FLabel {
    int r, x, y;
    friend bool operator==(const FLabel&, const FLabel&) = default;
};

/// card{ tau in S_n | plain[i] == conj[tau(i)] for all i }, by enumeration.
inline long wick_pair_count(const std::vector<FLabel>& plain, const std::vector<FLabel>& conj) {
    if (plain.size() != conj.size()) return 0;
    const std::size_t n = plain.size();
    if (n == 0) return 1;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    long count = 0;
    do {
        bool match = true;
        for (std::size_t i = 0; i < n && match; ++i) match = plain[i] == conj[idx[i]];
        count += match ? 1 : 0;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return count;
}

struct OracleConfig {
    int N = 2;
    int M = 0;  // required for Wishart / rectangular monomials
};

/// Work estimate per index-chain enumeration; each G/H factor branches over a
/// column, each W over a column and an inner index.
inline double chain_branch_estimate(const std::vector<Factor>& factors, int dim) {
    double est = dim;
    for (const Factor& f : factors) {
        if (std::holds_alternative<GaussF>(f) || std::holds_alternative<HGaussF>(f)) est *= dim;
        if (std::holds_alternative<WishartF>(f)) est *= static_cast<double>(dim) * dim;
    }
    return est;
}

struct ChainContext {
    OracleConfig cfg;
    int dim = 0;
    bool rectangular = false;
    // current permutation tuples (images), per family
    std::vector<Perm> u_perms;  // words over S_N (square U-words / rect bottom)
    std::vector<Perm> t_perms;  // rect top words over S_M
    std::vector<FLabel> plain, conj;
    BigInt accum = 0;
};

/// w(sigma)^{-1}(x) with the empty word mapped to the identity even when no
/// permutation families are in play.
inline int word_preimage(const FreeWord& w, const std::vector<Perm>& perms, int x) {
    if (w.is_identity()) return x;
    return inverse(evaluate_word(w, perms)).apply(x);
}

/// Walks one trace chain: position by position, branch where a Gaussian entry
/// leaves the column free, follow the forced image where a permutation factor
/// pins it. `done` runs with the labels extended by this chain.
inline void walk_chain(ChainContext& ctx, const std::vector<Factor>& factors, std::size_t pos,
                       int row, int start, const std::function<void()>& done) {
    const int N = ctx.cfg.N;
    const int M = ctx.cfg.M;
    if (pos == factors.size()) {
        if (row == start) done();
        return;
    }
    const bool last = pos + 1 == factors.size();
    const Factor& f = factors[pos];

    auto descend = [&](int next_row) { walk_chain(ctx, factors, pos + 1, next_row, start, done); };

    if (const auto* u = std::get_if<UWordF>(&f)) {
        if (ctx.rectangular) {
            // bottom-block word: rows/cols in [M+1, M+N]
            if (row <= M) return;
            descend(M + word_preimage(u->w, ctx.u_perms, row - M));
        } else {
            descend(word_preimage(u->w, ctx.u_perms, row));
        }
        return;
    }
    if (const auto* t = std::get_if<TWordF>(&f)) {
        if (row > M) return;
        descend(word_preimage(t->w, ctx.t_perms, row));
        return;
    }
    if (const auto* g = std::get_if<GaussF>(&f)) {
        auto emit = [&](int col) {
            if (g->star)
                ctx.conj.push_back({g->r, col, row});
            else
                ctx.plain.push_back({g->r, row, col});
            descend(col);
            if (g->star)
                ctx.conj.pop_back();
            else
                ctx.plain.pop_back();
        };
        if (last) {
            emit(start);
        } else {
            for (int col = 1; col <= N; ++col) emit(col);
        }
        return;
    }
    if (const auto* w = std::get_if<WishartF>(&f)) {
        auto emit = [&](int col) {
            for (int k = 1; k <= M; ++k) {
                ctx.conj.push_back({w->r, k, row});
                ctx.plain.push_back({w->r, k, col});
                descend(col);
                ctx.plain.pop_back();
                ctx.conj.pop_back();
            }
        };
        if (last) {
            emit(start);
        } else {
            for (int col = 1; col <= N; ++col) emit(col);
        }
        return;
    }
    const auto& h = std::get<HGaussF>(f);
    // H lives in rows [1,M] x cols (M, M+N]; H* in the transposed block.
    auto emit = [&](int col) {
        if (h.star) {
            if (row <= M || col > M) return;
            ctx.conj.push_back({h.r, col, row - M});
        } else {
            if (row > M || col <= M) return;
            ctx.plain.push_back({h.r, row, col - M});
        }
        descend(col);
        if (h.star)
            ctx.conj.pop_back();
        else
            ctx.plain.pop_back();
    };
    if (last) {
        emit(start);
    } else {
        const int lo = h.star ? 1 : M + 1;
        const int hi = h.star ? M : M + N;
        for (int col = lo; col <= hi; ++col) emit(col);
    }
}

/// All chains walked for one permutation tuple: sum the Wick counts.
inline void enumerate_chains(ChainContext& ctx, const std::vector<std::vector<Factor>>& chains,
                             std::size_t which) {
    if (which == chains.size()) {
        ctx.accum += wick_pair_count(ctx.plain, ctx.conj);
        return;
    }
    const auto& factors = chains[which];
    auto done = [&] { enumerate_chains(ctx, chains, which + 1); };
    for (int start = 1; start <= ctx.dim; ++start)
        walk_chain(ctx, factors, 0, start, start, done);
}

struct FamilyUse {
    int u_gens = 0;  // generators occurring in square U / rect bottom words
    int t_gens = 0;  // generators occurring in rect top words
    int gauss = 0, wishart = 0, h = 0;
    bool rectangular = false;
};

inline FamilyUse scan(const std::vector<std::vector<Factor>>& chains) {
    FamilyUse use;
    for (const auto& chain : chains)
        for (const Factor& f : chain) {
            if (const auto* u = std::get_if<UWordF>(&f)) use.u_gens = std::max(use.u_gens, u->w.max_generator());
            if (const auto* t = std::get_if<TWordF>(&f)) {
                use.t_gens = std::max(use.t_gens, t->w.max_generator());
                use.rectangular = true;
            }
            if (std::holds_alternative<GaussF>(f)) ++use.gauss;
            if (std::holds_alternative<WishartF>(f)) ++use.wishart;
            if (std::holds_alternative<HGaussF>(f)) {
                ++use.h;
                use.rectangular = true;
            }
        }
    return use;
}

inline BigInt oracle_raw_sum(const std::vector<std::vector<Factor>>& chains,
                             const OracleConfig& cfg, const FamilyUse& use, int dim) {
    // Iterate every (sigma, rho) tuple of the occurring generators.
    std::vector<std::vector<int>> perms_n, perms_m;
    auto all_perms = [](int n) {
        std::vector<std::vector<int>> out;
        std::vector<int> im(static_cast<std::size_t>(n));
        std::iota(im.begin(), im.end(), 1);
        do {
            out.push_back(im);
        } while (std::next_permutation(im.begin(), im.end()));
        return out;
    };
    perms_n = all_perms(cfg.N);
    if (use.t_gens > 0) perms_m = all_perms(cfg.M);

    double work = chain_branch_estimate(chains.front(), dim);
    for (std::size_t i = 1; i < chains.size(); ++i) work *= chain_branch_estimate(chains[i], dim);
    work *= std::pow(static_cast<double>(perms_n.size()), use.u_gens);
    work *= std::pow(static_cast<double>(perms_m.size() ? perms_m.size() : 1), use.t_gens);
    // each surviving leaf pays a Wick pair count over S_n
    const int pairs = use.wishart + use.gauss / 2 + use.h / 2;
    double leaf = pairs;
    for (int i = 2; i <= pairs; ++i) leaf *= i;
    work *= std::max(1.0, leaf);
    if (work > 2e8)
        throw BudgetError("wick oracle: enumeration estimate " + std::to_string(work) +
                          " exceeds the tiny-size budget (2e8)");

    ChainContext ctx;
    ctx.cfg = cfg;
    ctx.dim = dim;
    ctx.rectangular = use.rectangular;
    if (use.u_gens) ctx.u_perms.assign(static_cast<std::size_t>(use.u_gens), Perm::identity(cfg.N));
    if (use.t_gens) ctx.t_perms.assign(static_cast<std::size_t>(use.t_gens), Perm::identity(cfg.M));

    std::vector<std::size_t> odo(static_cast<std::size_t>(use.u_gens + use.t_gens), 0);
    while (true) {
        for (int g = 0; g < use.u_gens; ++g)
            ctx.u_perms[static_cast<std::size_t>(g)] =
                Perm::from_images(perms_n[odo[static_cast<std::size_t>(g)]]);
        for (int g = 0; g < use.t_gens; ++g)
            ctx.t_perms[static_cast<std::size_t>(g)] =
                Perm::from_images(perms_m[odo[static_cast<std::size_t>(use.u_gens + g)]]);
        enumerate_chains(ctx, chains, 0);

        std::size_t g = 0;
        for (; g < odo.size(); ++g) {
            const std::size_t limit = g < static_cast<std::size_t>(use.u_gens) ? perms_n.size() : perms_m.size();
            if (++odo[g] < limit) break;
            odo[g] = 0;
        }
        if (g == odo.size()) break;
    }
    return ctx.accum;
}

inline Rational oracle_value(const std::vector<std::vector<Factor>>& chains, int N, int M) {
    if (N < 1) throw ValidationError("oracle: N >= 1 required");
    const FamilyUse use = scan(chains);
    if ((use.wishart || use.rectangular) && M < 1)
        throw ValidationError("oracle: M >= 1 required for Wishart/rectangular monomials");
    if (use.gauss && use.wishart)
        throw UnsupportedError("oracle: monomial mixes Gauss and Wishart factors");
    const int dim = use.rectangular ? M + N : N;
    if (use.gauss % 2 || use.h % 2) return 0;  // odd Gaussian count: every Wick product dies

    OracleConfig cfg{N, use.rectangular || use.wishart ? M : 0};

    const BigInt raw = oracle_raw_sum(chains, cfg, use, dim);

    BigInt denom = dim;  // the 1/dim of the normalized trace, once per chain
    for (std::size_t i = 1; i < chains.size(); ++i) denom *= dim;
    denom *= big_pow(N, static_cast<unsigned>(use.gauss / 2));        // (1/sqrt N)^{#G}
    denom *= big_pow(N, static_cast<unsigned>(use.wishart));          // (1/N)^{#W}
    denom *= big_pow(dim, static_cast<unsigned>(use.h / 2));          // (1/sqrt(M+N))^{#H}
    denom *= big_pow(factorial(static_cast<unsigned>(N)), static_cast<unsigned>(use.u_gens));
    if (use.t_gens)
        denom *= big_pow(factorial(static_cast<unsigned>(M)), static_cast<unsigned>(use.t_gens));
    return Rational(raw, denom);
}

}  // namespace detail

/// E(tr m) by direct enumeration. Exact rational; must agree with the
/// reduced-formula path wherever both run.
inline Rational wick_oracle_moment(const Monomial& m, int N, int M = 0) {
    return detail::oracle_value({m.factors()}, N, M);
}

/// E(tr a * tr b) by direct enumeration over both index chains at once.
inline Rational wick_oracle_product_moment(const Monomial& a, const Monomial& b, int N, int M = 0) {
    if (a.family() != b.family())
        throw UnsupportedError("oracle: product of monomials from different families");
    return detail::oracle_value({a.factors(), b.factors()}, N, M);
}

}  // namespace permfree::oracle
