#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <numeric>
#include <random>

#include "permfree/exact_expectation.hpp"
#include "permfree/matrix_sim.hpp"
#include "permfree/parser.hpp"
#include "support/golden_suite.hpp"

using namespace permfree;
using permfree::testing::golden_suite;

namespace {

Monomial mono(const std::string& text, int s = 2) { return parse_monomial(text, s); }

}  // namespace

TEST_CASE("sample_uniform_permutation") {
    SECTION("n = 1 is always the identity") {
        RngStream stream(1, 0, 0);
        CHECK(sample_uniform_permutation(1, stream) == Perm::identity(1));
    }
    SECTION("n = 0 is invalid") {
        RngStream stream(1, 0, 0);
        CHECK_THROWS_AS(sample_uniform_permutation(0, stream), ValidationError);
    }
    SECTION("frequencies over S_3 are uniform within 4 sigma") {
        const int trials = 60000;
        std::map<std::vector<int>, int> counts;
        for (int t = 0; t < trials; ++t) {
            RngStream stream(123, static_cast<std::uint64_t>(t), 7);
            counts[sample_uniform_permutation(3, stream).images()] += 1;
        }
        REQUIRE(counts.size() == 6);
        const double p = 1.0 / 6.0;
        const double sigma = std::sqrt(trials * p * (1 - p));
        for (const auto& [im, c] : counts)
            CHECK(std::abs(c - trials * p) <= 4 * sigma);
    }
    SECTION("fixed (seed, index) reproduces the draw") {
        RngStream a(9, 4, rng_role::perm), b(9, 4, rng_role::perm);
        CHECK(sample_uniform_permutation(6, a) == sample_uniform_permutation(6, b));
    }
}

TEST_CASE("sample_gaussian_matrix moments") {
    RngStream stream(2024, 0, 1);
    const ComplexMatrix g = sample_gaussian_matrix(320, 320, stream);  // ~1e5 entries
    const double n = static_cast<double>(g.size());

    const double mean_abs2 = g.array().abs2().sum() / n;
    CHECK(std::abs(mean_abs2 - 1.0) <= 0.02);

    const std::complex<double> mean_sq = g.array().square().sum() / n;
    CHECK(std::abs(mean_sq) <= 0.02);

    RngStream again(2024, 0, 1);
    RngStream twin(2024, 0, 1);
    const ComplexMatrix a = sample_gaussian_matrix(4, 4, again);
    const ComplexMatrix b = sample_gaussian_matrix(4, 4, twin);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_ensemble") {
    EnsembleTags tags;
    tags.perms = 2;
    tags.gauss = 1;
    tags.wishart = 1;
    tags.rect_perms = 1;
    tags.rect_gauss = 1;

    const EnsembleSample s = build_ensemble(16, 12, tags, 5, 0);

    SECTION("Wishart draws are Hermitian") {
        const double dev = (s.wishart[0] - ComplexMatrix(s.wishart[0].adjoint())).cwiseAbs().maxCoeff();
        CHECK(dev <= 1e-12);
    }
    SECTION("tr(G G*) concentrates near 1") {
        double acc = 0;
        const int reps = 200;
        for (int t = 0; t < reps; ++t) {
            EnsembleTags g_only;
            g_only.gauss = 1;
            const EnsembleSample draw = build_ensemble(64, 0, g_only, 31, static_cast<std::uint64_t>(t));
            acc += (draw.gauss[0] * ComplexMatrix(draw.gauss[0].adjoint())).trace().real() / 64.0;
        }
        CHECK(std::abs(acc / reps - 1.0) <= 0.05);
    }
    SECTION("H occupies only the top-right block") {
        const int M = s.M, N = s.N;
        ComplexMatrix h = ComplexMatrix::Zero(M + N, M + N);
        h.block(0, M, M, N) = s.rect_g[0] / std::sqrt(static_cast<double>(M + N));
        // bottom-left, top-left, bottom-right must vanish by construction
        CHECK(h.block(0, 0, M, M).cwiseAbs().maxCoeff() == 0.0);
        CHECK(h.block(M, 0, N, M + N).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("permutation matrix identities") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 15;
        std::vector<int> im(static_cast<std::size_t>(n));
        std::iota(im.begin(), im.end(), 1);
        std::shuffle(im.begin(), im.end(), rng);
        const Perm p = Perm::from_images(im);
        std::shuffle(im.begin(), im.end(), rng);
        const Perm q = Perm::from_images(im);

        CHECK(permutation_matrix(compose(p, q)).isApprox(
            permutation_matrix(p) * permutation_matrix(q)));
        CHECK(ComplexMatrix(permutation_matrix(p).adjoint())
                  .isApprox(permutation_matrix(inverse(p))));
    }
}

TEST_CASE("evaluate_monomial_trace") {
    SECTION("U[e] is exactly 1") {
        const EnsembleSample s = build_ensemble(8, 0, EnsembleTags{}, 1, 0);
        CHECK(evaluate_monomial_trace(mono("U[e]"), s) == std::complex<double>(1.0, 0.0));
    }
    SECTION("pure words count fixed points") {
        const Monomial m = mono("U[g1.g2^-1]");
        const EnsembleTags tags = EnsembleTags::for_monomial(m);
        for (int t = 0; t < 10; ++t) {
            const EnsembleSample s = build_ensemble(9, 0, tags, 3, static_cast<std::uint64_t>(t));
            const Perm pi = evaluate_word(parse_word("g1.g2^-1", 2), s.sigma);
            CHECK(evaluate_monomial_trace(m, s) ==
                  std::complex<double>(fix_count(pi) / 9.0, 0.0));
        }
    }
    SECTION("1x1 Gaussian case is |f|^2") {
        const Monomial m = mono("G1 U[e] G1* U[e]");
        const EnsembleSample s = build_ensemble(1, 0, EnsembleTags::for_monomial(m), 11, 0);
        const std::complex<double> f = s.gauss[0](0, 0);
        CHECK(std::abs(evaluate_monomial_trace(m, s).real() - std::norm(f)) <= 1e-15);
    }
    SECTION("missing ensemble pieces are rejected") {
        const EnsembleSample s = build_ensemble(4, 0, EnsembleTags{}, 1, 0);
        CHECK_THROWS_AS(evaluate_monomial_trace(mono("G1 U[e] G1* U[e]"), s), ValidationError);
    }
    SECTION("permutation factors agree with dense multiplication") {
        const Monomial m = mono("G1 U[g1] G1* U[g2^-1]");
        const EnsembleTags tags = EnsembleTags::for_monomial(m);
        const EnsembleSample s = build_ensemble(7, 0, tags, 21, 3);
        const ComplexMatrix u1 = permutation_matrix(evaluate_word(parse_word("g1", 2), s.sigma));
        const ComplexMatrix u2 =
            permutation_matrix(evaluate_word(parse_word("g2^-1", 2), s.sigma));
        const std::complex<double> dense =
            (s.gauss[0] * u1 * ComplexMatrix(s.gauss[0].adjoint()) * u2).trace() / 7.0;
        CHECK(std::abs(evaluate_monomial_trace(m, s) - dense) <= 1e-12);
    }
    SECTION("rectangular trace agrees with dense block arithmetic") {
        const Monomial m = mono("H1* T[e] H1 U[g1]");
        const EnsembleTags tags = EnsembleTags::for_monomial(m);
        const EnsembleSample s = build_ensemble(5, 4, tags, 8, 2);
        const int dim = 9;
        ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
        h.block(0, s.M, s.M, s.N) = s.rect_g[0] / 3.0;
        ComplexMatrix t_e = ComplexMatrix::Zero(dim, dim);
        t_e.block(0, 0, s.M, s.M) = ComplexMatrix::Identity(s.M, s.M);
        ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
        u.block(s.M, s.M, s.N, s.N) =
            permutation_matrix(evaluate_word(parse_word("g1", 2), s.sigma));
        const std::complex<double> dense =
            (ComplexMatrix(h.adjoint()) * t_e * h * u).trace() / static_cast<double>(dim);
        CHECK(std::abs(evaluate_monomial_trace(m, s) - dense) <= 1e-12);
    }
}

TEST_CASE("mc_estimate basics") {
    SECTION("U[e] has mean 1 and variance 0") {
        const EstimateResult r = mc_estimate(mono("U[e]"), 16, 0, 50, 3);
        CHECK(r.mean == std::complex<double>(1.0, 0.0));
        CHECK(r.variance == 0.0);
    }
    SECTION("G1 U[e] G1* U[e] at N=32") {
        const EstimateResult r = mc_estimate(mono("G1 U[e] G1* U[e]"), 32, 0, 400, 17);
        CHECK(std::abs(r.mean - std::complex<double>(1.0, 0.0)) <= 4 * r.std_error);
    }
    SECTION("W1 at M=N=32") {
        const EstimateResult r = mc_estimate(mono("W1"), 32, 32, 400, 18);
        CHECK(std::abs(r.mean - std::complex<double>(1.0, 0.0)) <= 4 * r.std_error);
    }
    SECTION("samples < 1 is invalid") {
        CHECK_THROWS_AS(mc_estimate(mono("U[e]"), 4, 0, 0, 1), ValidationError);
    }
}

TEST_CASE("mc estimates match exact values at N = 6") {
    for (const auto& entry : golden_suite()) {
        const Monomial m = permfree::testing::suite_monomial(entry);
        const Rational exact = exact_moment(m, 6, 6).value;
        const EstimateResult r = mc_estimate(m, 6, 6, 10000, 20240810u);
        INFO(entry.text << ": exact " << to_double(exact) << ", mc " << r.mean.real() << " +- "
                        << r.std_error);
        CHECK(std::abs(r.mean - std::complex<double>(to_double(exact), 0.0)) <=
              4 * r.std_error + 1e-12);
    }
}

TEST_CASE("mc_estimate is worker-count independent") {
    const Monomial m = mono("W1 U[g1] W1 U[g1^-1]");
    const EstimateResult a = mc_estimate(m, 12, 12, 500, 99, 1);
    const EstimateResult b = mc_estimate(m, 12, 12, 500, 99, 2);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    CHECK(a.std_error == b.std_error);
}
