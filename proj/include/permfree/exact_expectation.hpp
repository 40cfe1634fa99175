#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "permfree/errors.hpp"
#include "permfree/monomial.hpp"
#include "permfree/perm.hpp"
#include "permfree/rational.hpp"
#include "permfree/rng.hpp"
#include "permfree/word_cycles.hpp"

namespace permfree {

enum class AverageMode { exact, sampled };

struct ExactOptions {
    AverageMode mode = AverageMode::exact;
    std::size_t samples = 100000;  // sampled mode: number of permutation tuples
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0 = default_workers(); never affects results
};

/// Exact enumeration runs only while (N!)^{s'} stays under this, where s'
/// counts the generators actually occurring in the words.
inline constexpr std::uint64_t kPermTupleBudget = 10'000'000;

struct PermAverageSpec {
    std::vector<FreeWord> words;  // multiset; empty means the average is 1
    int N = 1;
    AverageMode mode = AverageMode::exact;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
};

struct SampledEstimate {
    double mean = 0;
    double std_error = 0;
};

namespace detail {

// ---------------------------------------------------------------------------
// Permutation tuples
// ---------------------------------------------------------------------------

/// Words relabelled onto a compact generator set 1..s'. Only occurring
/// generators are enumerated or sampled; absent ones integrate out.
struct CompactWords {
    std::vector<FreeWord> words;
    int gen_count = 0;
    std::vector<bool> needs_inverse;  // per compact generator
};

inline CompactWords compact_generators(const std::vector<FreeWord>& words) {
    CompactWords out;
    std::map<int, int> relabel;
    for (const FreeWord& w : words) {
        std::vector<Letter> letters;
        for (const Letter& l : w.letters()) {
            auto [it, inserted] = relabel.try_emplace(l.generator, static_cast<int>(relabel.size()) + 1);
            letters.push_back(Letter{it->second, l.sign});
        }
        out.words.push_back(FreeWord::reduce(letters));
    }
    out.gen_count = static_cast<int>(relabel.size());
    out.needs_inverse.assign(static_cast<std::size_t>(out.gen_count), false);
    for (const FreeWord& w : out.words)
        for (const Letter& l : w.letters())
            if (l.sign < 0) out.needs_inverse[static_cast<std::size_t>(l.generator - 1)] = true;
    return out;
}

/// One tuple (sigma_1,...,sigma_{s'}) as raw image tables, with inverse
/// tables for the generators that occur inverted.
struct SigmaTuple {
    std::vector<const std::vector<int>*> fwd;
    std::vector<std::vector<int>> inv_storage;
    std::vector<const std::vector<int>*> inv;

    void set(std::size_t g, const std::vector<int>& images, bool needs_inverse) {
        fwd[g] = &images;
        if (needs_inverse) {
            auto& table = inv_storage[g];
            table.resize(images.size());
            for (std::size_t a = 0; a < images.size(); ++a)
                table[static_cast<std::size_t>(images[a] - 1)] = static_cast<int>(a + 1);
            inv[g] = &table;
        }
    }

    explicit SigmaTuple(std::size_t gens)
        : fwd(gens, nullptr), inv_storage(gens), inv(gens, nullptr) {}
};

inline long fix_of_word(const FreeWord& w, const SigmaTuple& tuple, int n) {
    const auto& letters = w.letters();
    long fixed = 0;
    for (int a = 1; a <= n; ++a) {
        int x = a;
        for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
            const auto g = static_cast<std::size_t>(it->generator - 1);
            const auto& table = it->sign > 0 ? *tuple.fwd[g] : *tuple.inv[g];
            x = table[static_cast<std::size_t>(x - 1)];
        }
        if (x == a) ++fixed;
    }
    return fixed;
}

/// Product of Fix over the word multiset, with identical words evaluated once.
inline long fix_product(const CompactWords& cw, const SigmaTuple& tuple, int n) {
    long prod = 1;
    for (std::size_t i = 0; i < cw.words.size() && prod != 0; ++i) {
        const FreeWord& w = cw.words[i];
        if (w.is_identity()) {
            prod *= n;
            continue;
        }
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) seen = seen || cw.words[j] == w;
        if (seen) continue;
        long fix = fix_of_word(w, tuple, n);
        long mult = 0;
        for (const FreeWord& other : cw.words) mult += other == w ? 1 : 0;
        for (long k = 0; k < mult; ++k) prod *= fix;
    }
    return prod;
}

/// Exact (1/(N!)^{s'}) sum over all tuples of the Fix product.
inline Rational exact_fix_average(const std::vector<FreeWord>& words, int N) {
    if (N < 1) throw ValidationError("permutation average requires N >= 1");
    CompactWords cw = compact_generators(words);
    if (cw.gen_count == 0) {
        // all words are e: the product is N^{#words} deterministically
        return Rational(big_pow(N, static_cast<unsigned>(words.size())), 1);
    }
    const BigInt n_fact = factorial(static_cast<unsigned>(N));
    const BigInt tuple_count = big_pow(n_fact, static_cast<unsigned>(cw.gen_count));
    if (tuple_count > kPermTupleBudget)
        throw BudgetError("exact permutation enumeration needs (N!)^{s'} = " + tuple_count.str() +
                          " tuples, above the budget of " + std::to_string(kPermTupleBudget) +
                          "; use sampled mode");

    // Materialize S_N once (at most 10! permutations within budget for s'=1).
    std::vector<std::vector<int>> perms;
    {
        std::vector<int> im(static_cast<std::size_t>(N));
        for (int a = 1; a <= N; ++a) im[static_cast<std::size_t>(a - 1)] = a;
        do {
            perms.push_back(im);
        } while (std::next_permutation(im.begin(), im.end()));
    }

    const std::size_t gens = static_cast<std::size_t>(cw.gen_count);
    SigmaTuple tuple(gens);
    std::vector<std::size_t> odometer(gens, 0);
    for (std::size_t g = 0; g < gens; ++g) tuple.set(g, perms[0], cw.needs_inverse[g]);

    BigInt total = 0;
    long chunk = 0;
    int chunk_fill = 0;
    while (true) {
        chunk += fix_product(cw, tuple, N);
        if (++chunk_fill == 4096) {
            total += chunk;
            chunk = 0;
            chunk_fill = 0;
        }
        std::size_t g = 0;
        for (; g < gens; ++g) {
            if (++odometer[g] < perms.size()) {
                tuple.set(g, perms[odometer[g]], cw.needs_inverse[g]);
                break;
            }
            odometer[g] = 0;
            tuple.set(g, perms[0], cw.needs_inverse[g]);
        }
        if (g == gens) break;
    }
    total += chunk;
    return Rational(total, tuple_count);
}

/// Draws the tuple for sample index t of a keyed stream family and evaluates
/// fix products; role_base keeps independent families (e.g. the S_M side and
/// the S_N side of the rectangular model) decorrelated.
inline void draw_tuple(SigmaTuple& tuple, std::vector<std::vector<int>>& storage,
                       const CompactWords& cw, int N, std::uint64_t seed, std::uint64_t t,
                       std::uint64_t role_base) {
    const std::size_t gens = static_cast<std::size_t>(cw.gen_count);
    for (std::size_t g = 0; g < gens; ++g) {
        auto& im = storage[g];
        im.resize(static_cast<std::size_t>(N));
        for (int a = 1; a <= N; ++a) im[static_cast<std::size_t>(a - 1)] = a;
        RngStream rng(seed, t, role_base + g);
        for (int i = N - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
            std::swap(im[static_cast<std::size_t>(i)], im[j]);
        }
        tuple.set(g, im, cw.needs_inverse[g]);
    }
}

inline SampledEstimate mean_and_stderr(const std::vector<double>& values) {
    const std::size_t n = values.size();
    SampledEstimate est;
    if (n == 0) return est;
    est.mean = pairwise_sum(values) / static_cast<double>(n);
    if (n >= 2) {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = values[i] - est.mean;
            sq[i] = d * d;
        }
        const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
        est.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return est;
}

inline SampledEstimate sampled_fix_average(const std::vector<FreeWord>& words, int N,
                                           std::size_t samples, std::uint64_t seed,
                                           unsigned workers) {
    if (samples < 1) throw ValidationError("sampled mode requires samples >= 1");
    const CompactWords cw = compact_generators(words);
    std::vector<double> values(samples);
    parallel_for(samples, workers, [&](std::size_t t) {
        SigmaTuple tuple(static_cast<std::size_t>(cw.gen_count));
        std::vector<std::vector<int>> storage(static_cast<std::size_t>(cw.gen_count));
        draw_tuple(tuple, storage, cw, N, seed, t, rng_role::perm_average);
        values[t] = static_cast<double>(fix_product(cw, tuple, N));
    });
    return mean_and_stderr(values);
}

}  // namespace detail

/// The shared permutation-average kernel: (1/(N!)^{s'}) * sum over tuples of
/// prod_w Fix w(sigma_1,...,sigma_{s'}), exactly or by unbiased sampling.
inline std::variant<Rational, SampledEstimate> permutation_fix_average(const PermAverageSpec& spec) {
    if (spec.mode == AverageMode::exact)
        return detail::exact_fix_average(spec.words, spec.N);
    return detail::sampled_fix_average(spec.words, spec.N, spec.samples, spec.seed, 0);
}

// ---------------------------------------------------------------------------
// Moment machinery (Wick-reduced sums over tau)
// ---------------------------------------------------------------------------

/// One tau of the reduced sum, for diagnostics and the CSV term export.
struct TermBreakdown {
    Perm tau;
    std::string tau_cycles;
    int power_of_N = 0;  // exponent carried by N in the prefactor
    int power_of_M = 0;  // exponent carried by M (rectangular: by M+N, in both)
    Rational perm_average = 0;  // exact mode only
    Rational contribution = 0;  // exact mode only
    double contribution_est = 0;  // sampled mode (0 when not tracked)
};

struct ExactMoment {
    bool exact = true;
    Rational value = 0;      // exact mode
    double estimate = 0;     // sampled mode
    double std_error = 0;    // sampled mode
    std::vector<TermBreakdown> terms;

    double as_double() const { return exact ? to_double(value) : estimate; }
};

namespace detail {

/// A fully prepared tau-term: exact prefactor, double prefactor, and the
/// cycle words split by which symmetric group they average over.
struct PreparedTerm {
    Perm tau;
    std::string tau_cycles;
    Rational coef = 0;
    double coef_double = 0;
    int power_of_N = 0;
    int power_of_M = 0;
    std::vector<FreeWord> words_n;  // averaged over S_N tuples
    std::vector<FreeWord> words_m;  // averaged over S_M tuples (rectangular)
};

inline ExactMoment evaluate_terms(std::vector<PreparedTerm> terms, int N, int M,
                                  const ExactOptions& opts) {
    ExactMoment out;
    if (opts.mode == AverageMode::exact) {
        out.exact = true;
        std::map<std::pair<int, std::vector<FreeWord>>, Rational> memo;
        auto average = [&](std::vector<FreeWord> words, int modulus) {
            std::sort(words.begin(), words.end());
            auto key = std::make_pair(modulus, words);
            auto it = memo.find(key);
            if (it != memo.end()) return it->second;
            Rational avg = exact_fix_average(key.second, modulus);
            memo.emplace(std::move(key), avg);
            return avg;
        };
        for (auto& term : terms) {
            Rational avg = average(term.words_n, N);
            if (M > 0) avg *= average(term.words_m, M);
            const Rational contribution = term.coef * avg;
            out.value += contribution;
            out.terms.push_back({term.tau, term.tau_cycles, term.power_of_N, term.power_of_M,
                                 avg, contribution, to_double(contribution)});
        }
        return out;
    }

    // Sampled mode: one shared tuple stream; per sample evaluate every term.
    out.exact = false;
    std::vector<FreeWord> union_n, union_m;
    for (const auto& term : terms) {
        union_n.insert(union_n.end(), term.words_n.begin(), term.words_n.end());
        union_m.insert(union_m.end(), term.words_m.begin(), term.words_m.end());
    }
    const CompactWords relabel_n = compact_generators(union_n);
    const CompactWords relabel_m = compact_generators(union_m);
    // Re-split the relabelled words back onto their terms.
    {
        std::size_t pos = 0;
        for (auto& term : terms)
            for (auto& w : term.words_n) w = relabel_n.words[pos++];
        pos = 0;
        for (auto& term : terms)
            for (auto& w : term.words_m) w = relabel_m.words[pos++];
    }

    const std::size_t samples = std::max<std::size_t>(opts.samples, 1);
    const bool track_terms = terms.size() * samples <= (1u << 22);
    std::vector<double> values(samples);
    std::vector<std::vector<double>> per_term;
    if (track_terms) per_term.assign(terms.size(), std::vector<double>(samples));

    parallel_for(samples, opts.workers, [&](std::size_t t) {
        SigmaTuple tuple_n(static_cast<std::size_t>(relabel_n.gen_count));
        std::vector<std::vector<int>> storage_n(static_cast<std::size_t>(relabel_n.gen_count));
        draw_tuple(tuple_n, storage_n, relabel_n, N, opts.seed, t, rng_role::perm_average);
        SigmaTuple tuple_m(static_cast<std::size_t>(relabel_m.gen_count));
        std::vector<std::vector<int>> storage_m(static_cast<std::size_t>(relabel_m.gen_count));
        if (M > 0)
            draw_tuple(tuple_m, storage_m, relabel_m, M, opts.seed, t,
                       rng_role::perm_average + 0x10000);

        std::map<FreeWord, long> cache_n, cache_m;
        auto fix_n = [&](const FreeWord& w) {
            if (w.is_identity()) return static_cast<long>(N);
            auto [it, fresh] = cache_n.try_emplace(w, 0);
            if (fresh) it->second = fix_of_word(w, tuple_n, N);
            return it->second;
        };
        auto fix_m = [&](const FreeWord& w) {
            if (w.is_identity()) return static_cast<long>(M);
            auto [it, fresh] = cache_m.try_emplace(w, 0);
            if (fresh) it->second = fix_of_word(w, tuple_m, M);
            return it->second;
        };

        double v = 0;
        for (std::size_t k = 0; k < terms.size(); ++k) {
            double prod = terms[k].coef_double;
            for (const FreeWord& w : terms[k].words_n) prod *= static_cast<double>(fix_n(w));
            for (const FreeWord& w : terms[k].words_m) prod *= static_cast<double>(fix_m(w));
            if (track_terms) per_term[k][t] = prod;
            v += prod;
        }
        values[t] = v;
    });

    const SampledEstimate est = mean_and_stderr(values);
    out.estimate = est.mean;
    out.std_error = est.std_error;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        double term_mean = 0;
        if (track_terms)
            term_mean = pairwise_sum(per_term[k]) / static_cast<double>(samples);
        out.terms.push_back({terms[k].tau, terms[k].tau_cycles, terms[k].power_of_N,
                             terms[k].power_of_M, 0, 0, term_mean});
    }
    return out;
}

inline std::vector<FreeWord> words_of(const std::vector<SquareTerm>& terms) {
    std::vector<FreeWord> words;
    words.reserve(terms.size());
    for (const auto& t : terms) words.push_back(t.word);
    return words;
}

/// Gaussian tau-sum over pairings with matched indices and opposite stars.
inline ExactMoment gaussian_sum(const std::vector<SquareTerm>& terms, const Perm& gamma,
                                int N, int extra_pow, const ExactOptions& opts) {
    const int n = static_cast<int>(terms.size());
    ExactMoment zero;
    // Wick part (1): without a balanced star pattern the pairing sum is empty.
    if (n % 2 != 0) return zero;
    int stars = 0;
    for (const auto& t : terms) stars += t.star ? 1 : 0;
    if (stars * 2 != n) return zero;

    const std::vector<FreeWord> words = words_of(terms);
    std::vector<detail::PreparedTerm> prepared;
    auto stream = enumerate_pairings(n);
    while (auto tau = stream.next()) {
        bool admissible = true;
        for (int a = 1; a <= n && admissible; ++a) {
            const auto& x = terms[static_cast<std::size_t>(a - 1)];
            const auto& y = terms[static_cast<std::size_t>(tau->apply(a) - 1)];
            admissible = x.r == y.r && x.star != y.star;
        }
        if (!admissible) continue;
        PreparedTerm pt;
        pt.tau = *tau;
        pt.tau_cycles = cycle_decomposition(*tau).to_string();
        pt.power_of_N = cycle_count(*tau);
        const int denom_pow = n + extra_pow;
        pt.coef = Rational(big_pow(N, static_cast<unsigned>(pt.power_of_N)),
                           big_pow(N, static_cast<unsigned>(denom_pow)));
        pt.coef_double = std::pow(static_cast<double>(N), pt.power_of_N - denom_pow);
        for (auto& [cyc, w] : word_cycle_products(words, *tau, gamma))
            pt.words_n.push_back(std::move(w));
        prepared.push_back(std::move(pt));
    }
    return evaluate_terms(std::move(prepared), N, 0, opts);
}

/// Wishart tau-sum over all index-matched permutations.
inline ExactMoment wishart_sum(const std::vector<SquareTerm>& terms, const Perm& gamma,
                               long M, int N, int extra_pow, const ExactOptions& opts) {
    if (M < 1) throw ValidationError("Wishart moments need M >= 1");
    const int n = static_cast<int>(terms.size());
    const std::vector<FreeWord> words = words_of(terms);
    std::vector<detail::PreparedTerm> prepared;
    auto stream = enumerate_permutations(n);
    while (auto tau = stream.next()) {
        bool admissible = true;
        for (int a = 1; a <= n && admissible; ++a)
            admissible = terms[static_cast<std::size_t>(a - 1)].r ==
                         terms[static_cast<std::size_t>(tau->apply(a) - 1)].r;
        if (!admissible) continue;
        PreparedTerm pt;
        pt.tau = *tau;
        pt.tau_cycles = cycle_decomposition(*tau).to_string();
        pt.power_of_M = cycle_count(*tau);
        const int denom_pow = n + extra_pow;
        pt.coef = Rational(big_pow(M, static_cast<unsigned>(pt.power_of_M)),
                           big_pow(N, static_cast<unsigned>(denom_pow)));
        pt.coef_double = std::pow(static_cast<double>(M), pt.power_of_M) /
                         std::pow(static_cast<double>(N), denom_pow);
        for (auto& [cyc, w] : word_cycle_products(words, *tau, gamma))
            pt.words_n.push_back(std::move(w));
        prepared.push_back(std::move(pt));
    }
    return evaluate_terms(std::move(prepared), N, 0, opts);
}

/// Rectangular tau-sum: parity-alternating index-matched pairings; the odd
/// cycles of tau^{-1}gamma average over S_M, the even ones over S_N.
inline ExactMoment rect_sum(const std::vector<RectTerm>& terms, const Perm& gamma, int M, int N,
                            int extra_pow, const ExactOptions& opts) {
    if (M < 1 || N < 1) throw ValidationError("rectangular moments need M, N >= 1");
    const int n = static_cast<int>(terms.size());
    std::vector<FreeWord> words;
    for (const auto& t : terms) words.push_back(t.word);
    std::vector<detail::PreparedTerm> prepared;
    auto stream = enumerate_pairings(n);
    while (auto tau = stream.next()) {
        bool admissible = true;
        for (int a = 1; a <= n && admissible; ++a) {
            const int b = tau->apply(a);
            admissible = (a % 2) != (b % 2) &&  // pair H* with H (Wick part (1))
                         terms[static_cast<std::size_t>(a - 1)].r ==
                             terms[static_cast<std::size_t>(b - 1)].r;
        }
        if (!admissible) continue;
        PreparedTerm pt;
        pt.tau = *tau;
        pt.tau_cycles = cycle_decomposition(*tau).to_string();
        const int pow_tau = cycle_count(*tau);
        pt.power_of_N = pow_tau;
        pt.power_of_M = pow_tau;
        const int denom_pow = n + extra_pow;
        pt.coef = Rational(big_pow(M + N, static_cast<unsigned>(pow_tau)),
                           big_pow(M + N, static_cast<unsigned>(denom_pow)));
        pt.coef_double = std::pow(static_cast<double>(M + N), pow_tau - denom_pow);
        for (auto& [cyc, w] : word_cycle_products(words, *tau, gamma)) {
            if (cyc.front() % 2 == 1)
                pt.words_m.push_back(std::move(w));
            else
                pt.words_n.push_back(std::move(w));
        }
        prepared.push_back(std::move(pt));
    }
    return evaluate_terms(std::move(prepared), N, M, opts);
}

inline ExactMoment constant_moment(Rational v) {
    ExactMoment m;
    m.value = std::move(v);
    return m;
}

}  // namespace detail

/// E(tr^{(N)} alpha^{(N)}) for a Gaussian/U-word monomial in alternating form.
inline ExactMoment exact_moment_gaussian(const AlternatingForm& af, int N,
                                         const ExactOptions& opts = {}) {
    if (!af.all_gauss())
        throw UnsupportedError("exact_moment_gaussian expects Gauss/U-word factors only");
    return detail::gaussian_sum(af.terms, gamma_n(static_cast<int>(af.n())), N, 1, opts);
}

/// E(tr^{(N)} beta^{(M,N)}) for a Wishart/U-word monomial in alternating form.
inline ExactMoment exact_moment_wishart(const AlternatingForm& af, long M, int N,
                                        const ExactOptions& opts = {}) {
    if (!af.all_wishart())
        throw UnsupportedError("exact_moment_wishart expects Wishart/U-word factors only");
    return detail::wishart_sum(af.terms, gamma_n(static_cast<int>(af.n())), M, N, 1, opts);
}

/// E(tr^{(M+N)} alpha^{(M,N)}) for the rectangular model.
inline ExactMoment exact_rectangular_moment(const RectAlternatingForm& rf, int M, int N,
                                            const ExactOptions& opts = {}) {
    return detail::rect_sum(rf.terms, gamma_n(static_cast<int>(rf.two_k())), M, N, 1, opts);
}

/// E(tr^{(N)} U_w^{(N)}) = (mean number of fixed points of w) / N.
inline Rational pure_u_moment(const FreeWord& w, int N) {
    return detail::exact_fix_average({w}, N) / N;
}

/// Var(tr^{(N)} U_w^{(N)}) = (E Fix^2 - (E Fix)^2) / N^2, exactly.
inline Rational pure_u_variance(const FreeWord& w, int N) {
    const Rational mean = detail::exact_fix_average({w}, N);
    const Rational second = detail::exact_fix_average({w, w}, N);
    return (second - mean * mean) / big_pow(N, 2);
}

/// E(tr T_w^{(M,N)} / tr U_w^{(M,N)}) in the rectangular embedding: the word
/// acts inside one diagonal block and the trace normalizes by M+N.
inline Rational exact_rect_pure_word_moment(const PureWord& pure, int M, int N) {
    const int block = pure.side == WordSide::rect_t ? M : N;
    return detail::exact_fix_average({pure.w}, block) / (M + N);
}

namespace detail {

inline AlternatingForm require_square_alternating(const Monomial& m, const char* who) {
    const CanonicalMonomial canon = canonicalize(m);
    if (const auto* af = std::get_if<AlternatingForm>(&canon)) return *af;
    if (std::holds_alternative<PureWord>(canon))
        throw UnsupportedError(std::string(who) +
                               ": pure permutation words fall outside this shape; use "
                               "pure_u_moment / pure_u_variance");
    throw UnsupportedError(std::string(who) + ": monomial is not in the square alternating shape");
}

}  // namespace detail

/// E(tr alpha * tr beta) for two monomials of the same square kind, via the
/// gamma_{m,n} tau-sum. Pure-U monomials are out of this shape by design.
inline ExactMoment exact_product_expectation(const Monomial& a, const Monomial& b, int N,
                                             long M = 0, const ExactOptions& opts = {}) {
    if (a.family() == Family::rectangular || b.family() == Family::rectangular)
        throw UnsupportedError(
            "exact_product_expectation handles square monomials; use "
            "exact_rectangular_product_expectation");
    const AlternatingForm fa = detail::require_square_alternating(a, "exact_product_expectation");
    const AlternatingForm fb = detail::require_square_alternating(b, "exact_product_expectation");
    std::vector<SquareTerm> combined = fa.terms;
    combined.insert(combined.end(), fb.terms.begin(), fb.terms.end());
    const Perm gamma = gamma_mn(static_cast<int>(fa.n()), static_cast<int>(fb.n()));
    const bool gauss = fa.all_gauss() && fb.all_gauss();
    const bool wishart = fa.all_wishart() && fb.all_wishart();
    if (gauss) return detail::gaussian_sum(combined, gamma, N, 2, opts);
    if (wishart) return detail::wishart_sum(combined, gamma, M, N, 2, opts);
    throw UnsupportedError("exact_product_expectation: both monomials must be all-Gauss or all-Wishart");
}

/// E(tr alpha * tr beta) for two rectangular monomials (gamma_{2k,2l} sum).
inline ExactMoment exact_rectangular_product_expectation(const Monomial& a, const Monomial& b,
                                                         int M, int N,
                                                         const ExactOptions& opts = {}) {
    const CanonicalMonomial ca = canonicalize(a);
    const CanonicalMonomial cb = canonicalize(b);
    const auto* ra = std::get_if<RectAlternatingForm>(&ca);
    const auto* rb = std::get_if<RectAlternatingForm>(&cb);
    if (!ra || !rb)
        throw UnsupportedError(
            "exact_rectangular_product_expectation expects rectangular alternating monomials");
    std::vector<RectTerm> combined = ra->terms;
    combined.insert(combined.end(), rb->terms.begin(), rb->terms.end());
    const Perm gamma = gamma_mn(static_cast<int>(ra->two_k()), static_cast<int>(rb->two_k()));
    return detail::rect_sum(combined, gamma, M, N, 2, opts);
}

/// Covariance term split per the product/moment decomposition: connected
/// taus contribute as-is, split taus cancel against E(tr a)E(tr b).
struct CovarianceBreakdownEntry {
    std::string tau_cycles;
    bool connected = false;
    Rational contribution = 0;  // connected term, or split-term difference share
};

struct CovarianceResult {
    Rational covariance = 0;
    Rational product_expectation = 0;
    Rational mean_a = 0;
    Rational mean_b = 0;
    std::vector<CovarianceBreakdownEntry> breakdown;
};

/// Cov(tr alpha, tr beta) = E(tr a tr b) - E(tr a) E(tr b), exact mode only.
inline CovarianceResult exact_covariance(const Monomial& a, const Monomial& b, int N, long M = 0,
                                         const ExactOptions& opts = {}) {
    if (opts.mode != AverageMode::exact)
        throw UnsupportedError("exact_covariance runs in exact mode; use matrix Monte Carlo for "
                               "sampled variance estimates");
    CovarianceResult out;
    const ExactMoment prod = exact_product_expectation(a, b, N, M, opts);
    const CanonicalMonomial ca = canonicalize(a);
    const CanonicalMonomial cb = canonicalize(b);
    const auto& fa = std::get<AlternatingForm>(ca);
    const auto& fb = std::get<AlternatingForm>(cb);
    const ExactMoment ea = fa.all_gauss() ? exact_moment_gaussian(fa, N, opts)
                                          : exact_moment_wishart(fa, M, N, opts);
    const ExactMoment eb = fb.all_gauss() ? exact_moment_gaussian(fb, N, opts)
                                          : exact_moment_wishart(fb, M, N, opts);
    out.product_expectation = prod.value;
    out.mean_a = ea.value;
    out.mean_b = eb.value;
    out.covariance = prod.value - ea.value * eb.value;

    // Split vs connected diagnostics: split taus minus the matching product
    // of single-trace terms cancel at leading order; connected taus carry the
    // O(1/N^2) decay.
    const int m = static_cast<int>(fa.n());
    const int n = static_cast<int>(fb.n());
    Rational split_total = 0;
    for (const auto& term : prod.terms) {
        if (is_mn_connected(term.tau, m, n)) {
            out.breakdown.push_back({term.tau_cycles, true, term.contribution});
        } else {
            split_total += term.contribution;
        }
    }
    out.breakdown.push_back({"(all split taus)", false, split_total - ea.value * eb.value});
    return out;
}

/// Dispatcher: E(tr of any supported monomial) at finite sizes.
inline ExactMoment exact_moment(const Monomial& m, int N, long M = 0,
                                const ExactOptions& opts = {}) {
    const CanonicalMonomial canon = canonicalize(m);
    if (std::holds_alternative<ZeroForm>(canon)) return detail::constant_moment(0);
    if (const auto* pure = std::get_if<PureWord>(&canon)) {
        if (pure->side == WordSide::square_u) {
            if (opts.mode == AverageMode::exact) return detail::constant_moment(pure_u_moment(pure->w, N));
            const auto est = detail::sampled_fix_average({pure->w}, N, opts.samples, opts.seed,
                                                         opts.workers);
            ExactMoment out;
            out.exact = false;
            out.estimate = est.mean / N;
            out.std_error = est.std_error / N;
            return out;
        }
        const int block = pure->side == WordSide::rect_t ? static_cast<int>(M) : N;
        if (M < 1) throw ValidationError("rectangular moments need M >= 1");
        if (opts.mode == AverageMode::exact)
            return detail::constant_moment(exact_rect_pure_word_moment(*pure, static_cast<int>(M), N));
        const auto est =
            detail::sampled_fix_average({pure->w}, block, opts.samples, opts.seed, opts.workers);
        ExactMoment out;
        out.exact = false;
        out.estimate = est.mean / (static_cast<double>(M) + N);
        out.std_error = est.std_error / (static_cast<double>(M) + N);
        return out;
    }
    if (const auto* af = std::get_if<AlternatingForm>(&canon)) {
        if (af->all_gauss()) return exact_moment_gaussian(*af, N, opts);
        if (af->all_wishart()) {
            if (M < 1) throw ValidationError("Wishart moments need M >= 1");
            return exact_moment_wishart(*af, M, N, opts);
        }
        throw UnsupportedError("monomial mixes Gauss and Wishart factors");
    }
    if (M < 1) throw ValidationError("rectangular moments need M >= 1");
    return exact_rectangular_moment(std::get<RectAlternatingForm>(canon), static_cast<int>(M), N,
                                    opts);
}

/// Var(tr m) exactly: product expectation against the adjoint monomial minus
/// the squared mean. Pure permutation words route to pure_u_variance.
inline Rational exact_trace_variance(const Monomial& m, int N, long M = 0,
                                     const ExactOptions& opts = {}) {
    const CanonicalMonomial canon = canonicalize(m);
    if (std::holds_alternative<ZeroForm>(canon)) return 0;
    if (const auto* pure = std::get_if<PureWord>(&canon)) {
        if (pure->side == WordSide::square_u) return pure_u_variance(pure->w, N);
        const int block = pure->side == WordSide::rect_t ? static_cast<int>(M) : N;
        const Rational mean = detail::exact_fix_average({pure->w}, block);
        const Rational second = detail::exact_fix_average({pure->w, pure->w}, block);
        return (second - mean * mean) / big_pow(static_cast<long>(M) + N, 2);
    }
    const Monomial adj = m.adjoint();
    if (m.family() == Family::rectangular) {
        const ExactMoment prod = exact_rectangular_product_expectation(m, adj, static_cast<int>(M), N, opts);
        const ExactMoment ea = exact_moment(m, N, M, opts);
        const ExactMoment eb = exact_moment(adj, N, M, opts);
        return prod.value - ea.value * eb.value;
    }
    return exact_covariance(m, adj, N, M, opts).covariance;
}

}  // namespace permfree
