#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "permfree/errors.hpp"
#include "permfree/monomial.hpp"
#include "permfree/perm.hpp"
#include "permfree/rng.hpp"

namespace permfree {

using ComplexMatrix = Eigen::MatrixXcd;

/// Uniform over S_n (Fisher-Yates with an unbiased index draw).
inline Perm sample_uniform_permutation(int n, RngStream& stream) {
    if (n < 1) throw ValidationError("sample_uniform_permutation: n >= 1 required");
    std::vector<int> im(static_cast<std::size_t>(n));
    for (int a = 1; a <= n; ++a) im[static_cast<std::size_t>(a - 1)] = a;
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(stream.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(im[static_cast<std::size_t>(i)], im[j]);
    }
    return Perm::from_images(std::move(im));
}

/// M x N of i.i.d. complex standard Gaussians (E f = 0, E|f|^2 = 1).
inline ComplexMatrix sample_gaussian_matrix(int rows, int cols, RngStream& stream) {
    if (rows < 1 || cols < 1) throw ValidationError("sample_gaussian_matrix: sizes >= 1 required");
    ComplexMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = stream.next_complex_gaussian();
    return g;
}

/// Which ensemble pieces a build should draw, per family index r in [1, s].
struct EnsembleTags {
    int perms = 0;     // sigma_r over S_N
    int gauss = 0;     // square G_r^{(N)} (scaled by 1/sqrt(N))
    int wishart = 0;   // W_r^{(M,N)}
    int rect_perms = 0;  // T_r over S_M
    int rect_gauss = 0;  // raw M x N blocks for H_r

    static EnsembleTags for_monomial(const Monomial& m) {
        EnsembleTags tags;
        for (const Factor& f : m.factors()) {
            if (const auto* u = std::get_if<UWordF>(&f)) {
                const int field = u->w.max_generator();
                tags.perms = std::max(tags.perms, field);
            } else if (const auto* t = std::get_if<TWordF>(&f)) {
                tags.rect_perms = std::max(tags.rect_perms, t->w.max_generator());
            } else if (const auto* g = std::get_if<GaussF>(&f)) {
                tags.gauss = std::max(tags.gauss, g->r);
            } else if (const auto* w = std::get_if<WishartF>(&f)) {
                tags.wishart = std::max(tags.wishart, w->r);
            } else if (const auto* h = std::get_if<HGaussF>(&f)) {
                tags.rect_gauss = std::max(tags.rect_gauss, h->r);
            }
        }
        return tags;
    }

    EnsembleTags merged(const EnsembleTags& other) const {
        return {std::max(perms, other.perms), std::max(gauss, other.gauss),
                std::max(wishart, other.wishart), std::max(rect_perms, other.rect_perms),
                std::max(rect_gauss, other.rect_gauss)};
    }
};

/// One joint draw of all requested matrices; the pieces are mutually
/// independent across indices and tags (separate keyed streams).
struct EnsembleSample {
    int N = 0;
    int M = 0;
    std::vector<Perm> sigma;             // [r]: sigma_r over S_N
    std::vector<ComplexMatrix> gauss;    // [r]: G_r^{(N)} already scaled by 1/sqrt(N)
    std::vector<ComplexMatrix> wishart;  // [r]: W_r^{(M,N)} = (1/N) G~* G~
    std::vector<Perm> t_perm;            // [r]: T_r over S_M
    std::vector<ComplexMatrix> rect_g;   // [r]: raw M x N Gaussian block of H_r
};

inline EnsembleSample build_ensemble(int N, int M, const EnsembleTags& tags, std::uint64_t seed,
                                     std::uint64_t sample_index) {
    if (N < 1) throw ValidationError("build_ensemble: N >= 1 required");
    if ((tags.wishart || tags.rect_perms || tags.rect_gauss) && M < 1)
        throw ValidationError("build_ensemble: M >= 1 required for Wishart/rectangular draws");
    EnsembleSample s;
    s.N = N;
    s.M = M;
    for (int r = 1; r <= tags.perms; ++r) {
        RngStream stream(seed, sample_index, rng_role::perm + static_cast<std::uint64_t>(r));
        s.sigma.push_back(sample_uniform_permutation(N, stream));
    }
    for (int r = 1; r <= tags.gauss; ++r) {
        RngStream stream(seed, sample_index, rng_role::gauss_square + static_cast<std::uint64_t>(r));
        s.gauss.push_back(sample_gaussian_matrix(N, N, stream) / std::sqrt(static_cast<double>(N)));
    }
    for (int r = 1; r <= tags.wishart; ++r) {
        RngStream stream(seed, sample_index, rng_role::gauss_wishart + static_cast<std::uint64_t>(r));
        const ComplexMatrix g = sample_gaussian_matrix(M, N, stream);
        s.wishart.push_back((g.adjoint() * g) / static_cast<double>(N));
    }
    for (int r = 1; r <= tags.rect_perms; ++r) {
        RngStream stream(seed, sample_index, rng_role::perm_rect_top + static_cast<std::uint64_t>(r));
        s.t_perm.push_back(sample_uniform_permutation(M, stream));
    }
    for (int r = 1; r <= tags.rect_gauss; ++r) {
        RngStream stream(seed, sample_index, rng_role::gauss_rect + static_cast<std::uint64_t>(r));
        s.rect_g.push_back(sample_gaussian_matrix(M, N, stream));
    }
    return s;
}

/// Mat(sigma): (Mat sigma)_{ij} = 1 iff sigma(j) = i.
inline ComplexMatrix permutation_matrix(const Perm& p) {
    ComplexMatrix m = ComplexMatrix::Zero(p.size(), p.size());
    for (int j = 1; j <= p.size(); ++j) m(p.apply(j) - 1, j - 1) = 1.0;
    return m;
}

/// The GUE realization (G + G*)/sqrt(2) of a square scaled Gaussian.
inline ComplexMatrix gue_from_gauss(const ComplexMatrix& g) {
    return (g + ComplexMatrix(g.adjoint())) / std::sqrt(2.0);
}

namespace detail {

/// A factor viewed by the trace evaluator: either a dense matrix or a
/// partial permutation map on [dim] (identity outside its block for square
/// permutations; zero outside the block for rectangular T/U words).
struct TraceOp {
    std::optional<ComplexMatrix> dense;
    std::vector<int> map;        // col j (1-based) -> row map[j]; 0 kills the column
    bool is_dense() const { return dense.has_value(); }
};

inline TraceOp square_word_op(const FreeWord& w, const EnsembleSample& s) {
    TraceOp op;
    const Perm pi = w.is_identity() ? Perm::identity(s.N)
                                    : evaluate_word(w, s.sigma);
    op.map.resize(static_cast<std::size_t>(s.N));
    for (int j = 1; j <= s.N; ++j) op.map[static_cast<std::size_t>(j - 1)] = pi.apply(j);
    return op;
}

inline TraceOp rect_word_op(const FreeWord& w, bool top, const EnsembleSample& s) {
    TraceOp op;
    const int dim = s.M + s.N;
    const int block = top ? s.M : s.N;
    const int offset = top ? 0 : s.M;
    const auto& fam = top ? s.t_perm : s.sigma;
    const Perm pi = w.is_identity() ? Perm::identity(block) : evaluate_word(w, fam);
    op.map.assign(static_cast<std::size_t>(dim), 0);
    for (int j = 1; j <= block; ++j)
        op.map[static_cast<std::size_t>(offset + j - 1)] = offset + pi.apply(j);
    return op;
}

inline TraceOp h_op(const HGaussF& h, const EnsembleSample& s) {
    const int dim = s.M + s.N;
    ComplexMatrix full = ComplexMatrix::Zero(dim, dim);
    full.block(0, s.M, s.M, s.N) = s.rect_g[static_cast<std::size_t>(h.r - 1)] /
                                   std::sqrt(static_cast<double>(dim));
    TraceOp op;
    op.dense = h.star ? ComplexMatrix(full.adjoint()) : std::move(full);
    return op;
}

inline TraceOp factor_op(const Factor& f, const EnsembleSample& s, Family family) {
    return std::visit(
        [&](const auto& v) -> TraceOp {
            using F = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<F, UWordF>) {
                return family == Family::square ? square_word_op(v.w, s)
                                                : rect_word_op(v.w, false, s);
            } else if constexpr (std::is_same_v<F, TWordF>) {
                return rect_word_op(v.w, true, s);
            } else if constexpr (std::is_same_v<F, GaussF>) {
                TraceOp op;
                const auto& g = s.gauss[static_cast<std::size_t>(v.r - 1)];
                op.dense = v.star ? ComplexMatrix(g.adjoint()) : g;
                return op;
            } else if constexpr (std::is_same_v<F, WishartF>) {
                TraceOp op;
                op.dense = s.wishart[static_cast<std::size_t>(v.r - 1)];
                return op;
            } else {
                return h_op(v, s);
            }
        },
        f);
}

/// acc <- acc * op, with permutation ops applied as column remaps.
inline void apply_right(ComplexMatrix& acc, const TraceOp& op) {
    if (op.is_dense()) {
        acc = acc * *op.dense;
        return;
    }
    ComplexMatrix out = ComplexMatrix::Zero(acc.rows(), acc.cols());
    for (int j = 1; j <= static_cast<int>(op.map.size()); ++j) {
        const int target = op.map[static_cast<std::size_t>(j - 1)];
        if (target != 0) out.col(j - 1) = acc.col(target - 1);
    }
    acc = std::move(out);
}

/// tr(acc * op) without materializing the product.
inline std::complex<double> trace_with(const ComplexMatrix& acc, const TraceOp& op) {
    if (op.is_dense()) return (acc.array() * op.dense->transpose().array()).sum();
    std::complex<double> t = 0;
    for (int j = 1; j <= static_cast<int>(op.map.size()); ++j) {
        const int target = op.map[static_cast<std::size_t>(j - 1)];
        if (target != 0) t += acc(j - 1, target - 1);
    }
    return t;
}

inline ComplexMatrix materialize(const TraceOp& op, int dim) {
    if (op.is_dense()) return *op.dense;
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (int j = 1; j <= dim; ++j) {
        const int target = op.map[static_cast<std::size_t>(j - 1)];
        if (target != 0) m(target - 1, j - 1) = 1.0;
    }
    return m;
}

}  // namespace detail

/// Normalized trace of the monomial evaluated on one ensemble draw:
/// tr^{(N)} for the square family, tr^{(M+N)} for the rectangular one.
/// Permutation-word factors are applied as index maps, never as dense
/// multiplications.
inline std::complex<double> evaluate_monomial_trace(const Monomial& m, const EnsembleSample& s) {
    const EnsembleTags need = EnsembleTags::for_monomial(m);
    if (need.perms > static_cast<int>(s.sigma.size()) ||
        need.gauss > static_cast<int>(s.gauss.size()) ||
        need.wishart > static_cast<int>(s.wishart.size()) ||
        need.rect_perms > static_cast<int>(s.t_perm.size()) ||
        need.rect_gauss > static_cast<int>(s.rect_g.size()))
        throw ValidationError("evaluate_monomial_trace: sample lacks a family the monomial uses");
    if (m.family() == Family::rectangular && s.M < 1)
        throw ValidationError("evaluate_monomial_trace: rectangular monomial needs an M block");

    const int dim = m.family() == Family::square ? s.N : s.M + s.N;
    const auto& factors = m.factors();
    if (factors.empty()) return 1.0;

    // Pure square permutation words never touch matrices at all.
    if (m.family() == Family::square) {
        bool pure = true;
        FreeWord w;
        for (const Factor& f : factors) {
            if (const auto* u = std::get_if<UWordF>(&f)) {
                w = w.concat(u->w);
            } else {
                pure = false;
                break;
            }
        }
        if (pure) {
            const Perm pi = w.is_identity() ? Perm::identity(s.N) : evaluate_word(w, s.sigma);
            return static_cast<double>(fix_count(pi)) / dim;
        }
    }

    std::vector<detail::TraceOp> ops;
    ops.reserve(factors.size());
    for (const Factor& f : factors) ops.push_back(detail::factor_op(f, s, m.family()));

    // The trace is cyclic: start at a dense factor when one exists so that
    // permutation factors are only ever applied as remaps.
    std::size_t first_dense = 0;
    while (first_dense < ops.size() && !ops[first_dense].is_dense()) ++first_dense;
    if (first_dense < ops.size())
        std::rotate(ops.begin(), ops.begin() + static_cast<std::ptrdiff_t>(first_dense), ops.end());

    if (ops.size() == 1) {
        const ComplexMatrix only = detail::materialize(ops[0], dim);
        return only.trace() / static_cast<double>(dim);
    }

    ComplexMatrix acc = detail::materialize(ops[0], dim);
    for (std::size_t i = 1; i + 1 < ops.size(); ++i) detail::apply_right(acc, ops[i]);
    return detail::trace_with(acc, ops.back()) / static_cast<double>(dim);
}

struct EstimateResult {
    std::complex<double> mean;
    double variance = 0;   // sample variance of the traces
    double std_error = 0;  // sqrt(variance / samples)
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline EstimateResult reduce_estimate(const std::vector<std::complex<double>>& values,
                                      std::uint64_t seed) {
    EstimateResult r;
    r.samples = values.size();
    r.seed = seed;
    r.mean = pairwise_sum(values) / static_cast<double>(values.size());
    if (values.size() >= 2) {
        std::vector<double> sq(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) sq[i] = std::norm(values[i] - r.mean);
        r.variance = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
        r.std_error = std::sqrt(r.variance / static_cast<double>(values.size()));
    }
    return r;
}

}  // namespace detail

/// i.i.d. Monte Carlo estimate of E(tr m). Deterministic for a fixed seed
/// regardless of the worker count.
inline EstimateResult mc_estimate(const Monomial& m, int N, int M, std::size_t samples,
                                  std::uint64_t seed, unsigned workers = 0) {
    if (samples < 1) throw ValidationError("mc_estimate: samples >= 1 required");
    const EnsembleTags tags = EnsembleTags::for_monomial(m);
    std::vector<std::complex<double>> values(samples);
    parallel_for(samples, workers, [&](std::size_t t) {
        const EnsembleSample s = build_ensemble(N, M, tags, seed, t);
        values[t] = evaluate_monomial_trace(m, s);
    });
    return detail::reduce_estimate(values, seed);
}

}  // namespace permfree
