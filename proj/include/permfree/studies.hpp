#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "permfree/exact_expectation.hpp"
#include "permfree/limit_moments.hpp"
#include "permfree/matrix_sim.hpp"
#include "permfree/parser.hpp"
#include "permfree/report.hpp"

namespace permfree {

enum class StudyMode { automatic, exact, sampled };

/// A reproducible study description: which monomials, which sizes, how much
/// sampling, and one seed. M is either given per size or derived as
/// round(c * N).
struct ExperimentConfig {
    int s = 2;
    std::vector<std::string> monomials;
    std::vector<int> sizes;
    std::vector<int> m_sizes;  // optional; parallel to sizes
    Rational c = 1;
    std::size_t samples = 400;         // matrix Monte Carlo samples
    std::size_t perm_samples = 100000;  // permutation tuples in sampled mode
    std::uint64_t seed = 1;
    StudyMode mode = StudyMode::automatic;
    bool with_mc = false;
    unsigned workers = 0;

    void validate() const {
        if (s < 1) throw ValidationError("s must be >= 1");
        if (c <= 0) throw ValidationError("c must be > 0");
        if (samples < 1) throw ValidationError("samples must be >= 1");
        if (perm_samples < 1) throw ValidationError("perm-samples must be >= 1");
        for (std::size_t i = 1; i < sizes.size(); ++i)
            if (sizes[i] <= sizes[i - 1])
                throw ValidationError("sizes must be strictly increasing");
        for (int n : sizes)
            if (n < 1) throw ValidationError("sizes must be >= 1");
        if (!m_sizes.empty() && m_sizes.size() != sizes.size())
            throw ValidationError("--m list must match the --n list length");
        for (const std::string& text : monomials) (void)parse_monomial(text, s);
    }

    long m_for(std::size_t idx) const {
        if (!m_sizes.empty()) return m_sizes[idx];
        return rounded_m(c, sizes[idx]);
    }

    /// M = round(c*N), half rounded up.
    static long rounded_m(const Rational& c, int N) {
        const Rational t = c * N * 2 + 1;
        const BigInt m = numerator(t) / (denominator(t) * 2);
        return std::max<long>(1, m.template convert_to<long>());
    }
};

namespace detail {

class RowTimer {
public:
    RowTimer() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Generators occurring in the monomial's words, split by family side.
inline std::pair<int, int> word_generator_counts(const Monomial& m) {
    std::vector<int> u_gens, t_gens;
    auto note = [](std::vector<int>& gens, const FreeWord& w) {
        for (const Letter& l : w.letters())
            if (std::find(gens.begin(), gens.end(), l.generator) == gens.end())
                gens.push_back(l.generator);
    };
    for (const Factor& f : m.factors()) {
        if (const auto* u = std::get_if<UWordF>(&f)) note(u_gens, u->w);
        if (const auto* t = std::get_if<TWordF>(&f)) note(t_gens, t->w);
    }
    return {static_cast<int>(u_gens.size()), static_cast<int>(t_gens.size())};
}

inline bool exact_budget_ok(const Monomial& m, int N, long M) {
    const auto [u_gens, t_gens] = word_generator_counts(m);
    const int bottom = m.family() == Family::rectangular ? N : N;
    if (big_pow(factorial(static_cast<unsigned>(bottom)), static_cast<unsigned>(u_gens)) >
        kPermTupleBudget)
        return false;
    if (t_gens > 0 &&
        big_pow(factorial(static_cast<unsigned>(M)), static_cast<unsigned>(t_gens)) >
            kPermTupleBudget)
        return false;
    return true;
}

inline AverageMode pick_mode(const ExperimentConfig& cfg, const Monomial& m, int N, long M) {
    switch (cfg.mode) {
        case StudyMode::exact: return AverageMode::exact;
        case StudyMode::sampled: return AverageMode::sampled;
        case StudyMode::automatic:
            return exact_budget_ok(m, N, M) ? AverageMode::exact : AverageMode::sampled;
    }
    return AverageMode::exact;
}

inline ReportRow error_row(const std::string& label, int N, long M, std::string what, double ms) {
    for (char& ch : what)
        if (ch == ',' || ch == '\n') ch = ';';  // keep the CSV row well-formed
    ReportRow row;
    row.monomial = label + "  # " + what;
    row.N = N;
    row.M = static_cast<int>(M);
    row.estimator = "error";
    row.value = {std::nan(""), 0.0};
    row.runtime_ms = ms;
    return row;
}

inline void sort_rows(std::vector<ReportRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (a.monomial != b.monomial) return a.monomial < b.monomial;
        if (a.N != b.N) return a.N < b.N;
        return a.estimator < b.estimator;
    });
}

}  // namespace detail

/// For each monomial and size: the limit value, the finite-size expectation
/// (exact or tuple-sampled), optionally a full matrix Monte Carlo estimate,
/// and the error against the limit.
inline std::vector<ReportRow> run_convergence_study(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ReportRow> rows;
    for (const std::string& text : cfg.monomials) {
        const Monomial m = parse_monomial(text, cfg.s);
        const LimitValue limit = freeness_prediction(m);
        const Rational limit_at_c = limit.evaluate(cfg.c);
        {
            ReportRow row;
            row.monomial = text;
            row.estimator = "limit";
            row.value = {to_double(limit_at_c), 0.0};
            row.exact_fraction = to_fraction_string(limit_at_c);
            rows.push_back(std::move(row));
        }
        for (std::size_t idx = 0; idx < cfg.sizes.size(); ++idx) {
            const int N = cfg.sizes[idx];
            const long M = cfg.m_for(idx);
            detail::RowTimer timer;
            try {
                ExactOptions opts;
                opts.mode = detail::pick_mode(cfg, m, N, M);
                opts.samples = cfg.perm_samples;
                opts.seed = cfg.seed;
                opts.workers = cfg.workers;
                const ExactMoment em = exact_moment(m, N, M, opts);
                ReportRow row;
                row.monomial = text;
                row.N = N;
                row.M = static_cast<int>(M);
                row.estimator = em.exact ? "exact" : "exact-sampled";
                row.value = {em.as_double(), 0.0};
                if (!em.exact) row.std_error = em.std_error;
                if (em.exact) {
                    row.exact_fraction = to_fraction_string(em.value);
                    row.abs_error_vs_limit = to_double(abs(em.value - limit_at_c));
                } else {
                    row.abs_error_vs_limit = std::abs(em.estimate - to_double(limit_at_c));
                }
                row.runtime_ms = timer.elapsed_ms();
                rows.push_back(std::move(row));
            } catch (const Error& e) {
                rows.push_back(detail::error_row(text, N, M, e.what(), timer.elapsed_ms()));
            }
            if (cfg.with_mc) {
                detail::RowTimer mc_timer;
                try {
                    const EstimateResult r =
                        mc_estimate(m, N, static_cast<int>(M), cfg.samples, cfg.seed, cfg.workers);
                    ReportRow row;
                    row.monomial = text;
                    row.N = N;
                    row.M = static_cast<int>(M);
                    row.estimator = "mc";
                    row.value = r.mean;
                    row.std_error = r.std_error;
                    row.abs_error_vs_limit = std::abs(r.mean - std::complex<double>(
                                                                   to_double(limit_at_c), 0.0));
                    row.runtime_ms = mc_timer.elapsed_ms();
                    rows.push_back(std::move(row));
                } catch (const Error& e) {
                    rows.push_back(detail::error_row(text, N, M, e.what(), mc_timer.elapsed_ms()));
                }
            }
        }
    }
    detail::sort_rows(rows);
    return rows;
}

/// Exact trace variance at enumerable sizes, matrix Monte Carlo variance
/// beyond; every point is reported both raw and scaled by N^2.
inline std::vector<ReportRow> run_variance_study(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ReportRow> rows;
    for (const std::string& text : cfg.monomials) {
        const Monomial m = parse_monomial(text, cfg.s);
        for (std::size_t idx = 0; idx < cfg.sizes.size(); ++idx) {
            const int N = cfg.sizes[idx];
            const long M = cfg.m_for(idx);
            detail::RowTimer timer;
            try {
                bool use_exact = cfg.mode != StudyMode::sampled &&
                                 (cfg.mode == StudyMode::exact ||
                                  detail::exact_budget_ok(m, N, M));
                double var = 0, n2var = 0;
                std::optional<double> var_err;
                std::string estimator;
                std::optional<std::string> var_fraction, n2var_fraction;
                if (use_exact) {
                    try {
                        const Rational v = exact_trace_variance(m, N, M);
                        const Rational scaled = v * N * N;
                        var = to_double(v);
                        n2var = to_double(scaled);
                        var_fraction = to_fraction_string(v);
                        n2var_fraction = to_fraction_string(scaled);
                        estimator = "exact";
                    } catch (const BudgetError&) {
                        // tau enumeration above the cap: fall back to matrix MC
                        // unless exact mode was forced
                        if (cfg.mode == StudyMode::exact) throw;
                        use_exact = false;
                    }
                }
                if (!use_exact) {
                    const EstimateResult r =
                        mc_estimate(m, N, static_cast<int>(M), cfg.samples, cfg.seed, cfg.workers);
                    var = r.variance;
                    n2var = var * N * N;
                    // relative error of a sample variance under near-normal traces
                    var_err = r.variance * std::sqrt(2.0 / std::max<double>(1, cfg.samples - 1));
                    estimator = "mc";
                }
                const double ms = timer.elapsed_ms();
                ReportRow raw;
                raw.monomial = text;
                raw.N = N;
                raw.M = static_cast<int>(M);
                raw.estimator = estimator;
                raw.value = {var, 0.0};
                raw.std_error = var_err;
                raw.exact_fraction = var_fraction;
                raw.runtime_ms = ms;
                rows.push_back(raw);

                ReportRow scaled = raw;
                scaled.monomial = "N^2*Var[" + text + "]";
                scaled.value = {n2var, 0.0};
                if (var_err) scaled.std_error = *var_err * N * N;
                scaled.exact_fraction = n2var_fraction;
                rows.push_back(std::move(scaled));
            } catch (const Error& e) {
                rows.push_back(detail::error_row(text, N, M, e.what(), timer.elapsed_ms()));
            }
        }
    }
    detail::sort_rows(rows);
    return rows;
}

/// Empirical boundedness probe: averages of Fix, Fix^2 and pair products
/// over permutation tuples, across sizes.
inline std::vector<ReportRow> run_boundedness_probe(const std::vector<std::string>& words,
                                                    const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<FreeWord> parsed;
    for (const std::string& w : words) parsed.push_back(parse_word(w, cfg.s));
    std::vector<ReportRow> rows;

    auto average_row = [&](const std::string& label, const std::vector<FreeWord>& multiset,
                           int N) {
        detail::RowTimer timer;
        PermAverageSpec spec;
        spec.words = multiset;
        spec.N = N;
        spec.samples = cfg.perm_samples;
        spec.seed = cfg.seed;
        // budget-driven mode choice on the combined word multiset
        std::vector<int> gens;
        for (const FreeWord& w : multiset)
            for (const Letter& l : w.letters())
                if (std::find(gens.begin(), gens.end(), l.generator) == gens.end())
                    gens.push_back(l.generator);
        const bool exact_ok =
            cfg.mode != StudyMode::sampled &&
            big_pow(factorial(static_cast<unsigned>(N)), static_cast<unsigned>(gens.size())) <=
                kPermTupleBudget;
        spec.mode = exact_ok ? AverageMode::exact : AverageMode::sampled;
        const auto result = permutation_fix_average(spec);
        ReportRow row;
        row.monomial = label;
        row.N = N;
        row.estimator = exact_ok ? "exact" : "exact-sampled";
        if (const auto* v = std::get_if<Rational>(&result)) {
            row.value = {to_double(*v), 0.0};
            row.exact_fraction = to_fraction_string(*v);
        } else {
            const auto& est = std::get<SampledEstimate>(result);
            row.value = {est.mean, 0.0};
            row.std_error = est.std_error;
        }
        row.runtime_ms = timer.elapsed_ms();
        rows.push_back(std::move(row));
    };

    for (int N : cfg.sizes) {
        for (std::size_t i = 0; i < parsed.size(); ++i) {
            average_row("Fix[" + words[i] + "]", {parsed[i]}, N);
            average_row("Fix2[" + words[i] + "]", {parsed[i], parsed[i]}, N);
            for (std::size_t j = i + 1; j < parsed.size(); ++j)
                average_row("FixFix[" + words[i] + "|" + words[j] + "]",
                            {parsed[i], parsed[j]}, N);
        }
    }
    detail::sort_rows(rows);
    return rows;
}

namespace detail {

/// Monomial for a word in Y = U W and Y* = W U*: `pattern` holds '+' for Y
/// and '-' for Y*.
inline Monomial y_word_monomial(const std::string& pattern) {
    std::vector<Factor> factors;
    for (char ch : pattern) {
        if (ch == '+') {
            factors.push_back(UWordF{FreeWord::generator(1)});
            factors.push_back(WishartF{1});
        } else {
            factors.push_back(WishartF{1});
            factors.push_back(UWordF{FreeWord::generator(1, -1)});
        }
    }
    return Monomial(Family::square, std::move(factors));
}

}  // namespace detail

/// Named demonstration studies.
///  - permuted-gue: moments of X X* for X a row-permuted GUE matrix, against
///    the Catalan numbers.
///  - permuted-wishart: alternating *-moments of Y = U W against the
///    free-Poisson/Haar predictions.
///  - diagonal-obstruction: the exact identity U*DUD = DU*DU for permutation
///    U and diagonal D, which rules out constant diagonal matrices.
inline std::vector<ReportRow> run_demo(const std::string& name, const ExperimentConfig& cfg) {
    std::vector<ReportRow> rows;

    if (name == "permuted-gue") {
        const int N = cfg.sizes.empty() ? 512 : cfg.sizes.back();
        const std::size_t samples = cfg.samples;
        std::vector<std::vector<std::complex<double>>> per_k(
            3, std::vector<std::complex<double>>(samples));
        detail::RowTimer timer;
        parallel_for(samples, cfg.workers, [&](std::size_t t) {
            EnsembleTags tags;
            tags.perms = 1;
            tags.gauss = 1;
            const EnsembleSample s = build_ensemble(N, 0, tags, cfg.seed, t);
            const ComplexMatrix y = gue_from_gauss(s.gauss[0]);
            ComplexMatrix x(N, N);
            for (int i = 1; i <= N; ++i) x.row(s.sigma[0].apply(i) - 1) = y.row(i - 1);
            const ComplexMatrix a = x * x.adjoint();
            const ComplexMatrix a2 = a * a;
            per_k[0][t] = a.trace() / static_cast<double>(N);
            per_k[1][t] = a2.trace() / static_cast<double>(N);
            per_k[2][t] = (a2.array() * a.transpose().array()).sum() / static_cast<double>(N);
        });
        const double ms = timer.elapsed_ms();
        const double catalan[4] = {0, 1, 2, 5};
        for (int k = 1; k <= 3; ++k) {
            const EstimateResult est =
                detail::reduce_estimate(per_k[static_cast<std::size_t>(k - 1)], cfg.seed);
            ReportRow row;
            row.monomial = "tr((XX*)^" + std::to_string(k) + ")";
            row.N = N;
            row.estimator = "mc";
            row.value = est.mean;
            row.std_error = est.std_error;
            row.abs_error_vs_limit = std::abs(est.mean - std::complex<double>(catalan[k], 0.0));
            row.runtime_ms = ms;
            rows.push_back(std::move(row));
        }
    } else if (name == "permuted-wishart") {
        const int N = cfg.sizes.empty() ? 256 : cfg.sizes.back();
        const long M = cfg.m_sizes.empty()
                           ? ExperimentConfig{cfg.s, {}, {N}, {}, cfg.c}.m_for(0)
                           : cfg.m_sizes.back();
        const std::vector<std::pair<std::string, std::string>> cases = {
            {"Y Y*", "+-"},
            {"Y Y* Y Y*", "+-+-"},
            {"Y Y Y* Y*", "++--"},
        };
        std::vector<Monomial> monomials;
        EnsembleTags tags;
        for (const auto& [label, pattern] : cases) {
            monomials.push_back(detail::y_word_monomial(pattern));
            tags = tags.merged(EnsembleTags::for_monomial(monomials.back()));
        }
        const std::size_t samples = cfg.samples;
        std::vector<std::vector<std::complex<double>>> values(
            cases.size(), std::vector<std::complex<double>>(samples));
        detail::RowTimer timer;
        parallel_for(samples, cfg.workers, [&](std::size_t t) {
            const EnsembleSample s = build_ensemble(N, static_cast<int>(M), tags, cfg.seed, t);
            for (std::size_t k = 0; k < monomials.size(); ++k)
                values[k][t] = evaluate_monomial_trace(monomials[k], s);
        });
        const double ms = timer.elapsed_ms();
        for (std::size_t k = 0; k < cases.size(); ++k) {
            const Rational prediction = freeness_prediction(monomials[k]).evaluate(cfg.c);
            const EstimateResult est = detail::reduce_estimate(values[k], cfg.seed);
            ReportRow row;
            row.monomial = cases[k].first;
            row.N = N;
            row.M = static_cast<int>(M);
            row.estimator = "mc";
            row.value = est.mean;
            row.std_error = est.std_error;
            row.abs_error_vs_limit =
                std::abs(est.mean - std::complex<double>(to_double(prediction), 0.0));
            row.runtime_ms = ms;
            rows.push_back(std::move(row));
        }
    } else if (name == "diagonal-obstruction") {
        const int N = cfg.sizes.empty() ? 32 : cfg.sizes.back();
        const std::size_t draws = cfg.samples;
        std::vector<double> deviations(draws);
        detail::RowTimer timer;
        parallel_for(draws, cfg.workers, [&](std::size_t t) {
            EnsembleTags tags;
            tags.perms = 1;
            const EnsembleSample s = build_ensemble(N, 0, tags, cfg.seed, t);
            const ComplexMatrix u = permutation_matrix(s.sigma[0]);
            ComplexMatrix d = ComplexMatrix::Zero(N, N);
            for (int j = 1; j <= N; ++j) d(j - 1, j - 1) = static_cast<double>(j) / N;
            const ComplexMatrix lhs = ComplexMatrix(u.adjoint()) * d * u * d;
            const ComplexMatrix rhs = d * ComplexMatrix(u.adjoint()) * d * u;
            deviations[t] = (lhs - rhs).cwiseAbs().maxCoeff();
        });
        double worst = 0;
        for (double dev : deviations) worst = std::max(worst, dev);
        ReportRow row;
        row.monomial = "max|U*DUD-DU*DU|";
        row.N = N;
        row.estimator = "mc";
        row.value = {worst, 0.0};
        row.abs_error_vs_limit = worst;
        row.runtime_ms = timer.elapsed_ms();
        rows.push_back(std::move(row));
    } else {
        throw ValidationError("unknown demo '" + name +
                              "' (try permuted-gue, permuted-wishart, diagonal-obstruction)");
    }
    detail::sort_rows(rows);
    return rows;
}

}  // namespace permfree
