#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "permfree/limit_moments.hpp"
#include "permfree/parser.hpp"

using namespace permfree;

namespace {

Monomial mono(const std::string& text, int s = 2) { return parse_monomial(text, s); }

const AlternatingForm& alt(const CanonicalMonomial& c) { return std::get<AlternatingForm>(c); }

long catalan(int k) {
    long acc = 1;
    for (int i = 0; i < k; ++i) acc = acc * 2 * (2 * i + 1) / (i + 2);
    return acc;
}

}  // namespace

TEST_CASE("canonicalize rotates and merges") {
    SECTION("leading word wraps behind the matrix factor") {
        const auto c = canonicalize(mono("U[g1] G1 U[g2]"));
        const auto& af = alt(c);
        REQUIRE(af.n() == 1);
        CHECK(af.terms[0].word == parse_word("g2.g1", 2));
    }
    SECTION("pure words merge to e") {
        const auto c = canonicalize(mono("U[g1] U[g1^-1]"));
        const auto& pure = std::get<PureWord>(c);
        CHECK(pure.side == WordSide::square_u);
        CHECK(pure.w.is_identity());
    }
    SECTION("rectangular block mismatch is Zero") {
        CHECK(std::holds_alternative<ZeroForm>(canonicalize(mono("H1 H1"))));
        CHECK(std::holds_alternative<ZeroForm>(canonicalize(mono("H1"))));
        CHECK(std::holds_alternative<ZeroForm>(canonicalize(mono("T[g1] U[g1]"))));
    }
    SECTION("rectangular rotation starts at an H*") {
        const auto c = canonicalize(mono("H1 U[e] H1* T[e]"));
        const auto& rf = std::get<RectAlternatingForm>(c);
        REQUIRE(rf.two_k() == 2);
        CHECK(rf.terms[0].r == 1);
    }
}

TEST_CASE("haar word moment") {
    CHECK(haar_word_moment(FreeWord{}) == 1);
    CHECK(haar_word_moment(parse_word("g1", 2)) == 0);
    CHECK(haar_word_moment(parse_word("g1.g2.g1^-1.g2^-1", 2)) == 0);
}

TEST_CASE("circular mixed moments") {
    CHECK(circular_mixed_moment(alt(canonicalize(mono("G1 U[e] G1* U[e]")))) == 1);
    CHECK(circular_mixed_moment(alt(canonicalize(mono("G1 U[e] G1* U[e] G1 U[e] G1* U[e]")))) == 2);
    CHECK(circular_mixed_moment(alt(canonicalize(mono("G1 U[g1] G1* U[g1^-1]")))) == 0);
    CHECK(circular_mixed_moment(alt(canonicalize(mono("G1 U[e] G2* U[e]")))) == 0);
    CHECK(circular_mixed_moment(alt(canonicalize(mono("G1 U[e] G1 U[e]")))) == 0);
}

TEST_CASE("circular (G U_e G* U_e)^k pattern counts Catalan") {
    for (int k = 1; k <= 5; ++k) {
        std::string text;
        for (int i = 0; i < k; ++i) text += (i ? " " : "") + std::string("G1 U[e] G1* U[e]");
        const long expect = static_cast<long>(enumerate_nc_pairings(2 * k).count());
        CHECK(circular_mixed_moment(alt(canonicalize(mono(text)))) == expect);
        CHECK(expect == catalan(k));
    }
}

TEST_CASE("free Poisson mixed moments") {
    CHECK(free_poisson_mixed_moment(alt(canonicalize(mono("W1")))) == CPolynomial::term(1));
    CHECK(free_poisson_mixed_moment(alt(canonicalize(mono("W1 U[e] W1 U[e]")))) ==
          CPolynomial::term(1) + CPolynomial::term(2));
    CHECK(free_poisson_mixed_moment(alt(canonicalize(mono("W1 U[e] W1 U[e] W1 U[e]")))) ==
          CPolynomial::term(3) + CPolynomial::term(2, 3) + CPolynomial::term(1));
    CHECK(free_poisson_mixed_moment(alt(canonicalize(mono("W1 U[g1] W1 U[g1^-1]")))) ==
          CPolynomial::term(2));
}

TEST_CASE("free Poisson all-e moments match the cumulant transform") {
    // with every cumulant equal to c, the n-th moment is sum over NC_n of c^#tau
    std::vector<CPolynomial> kappa(6, CPolynomial::term(1));
    const auto moments = moments_from_cumulants(kappa);
    for (int n = 1; n <= 6; ++n) {
        std::string text;
        for (int i = 0; i < n; ++i) text += (i ? " " : "") + std::string("W1 U[e]");
        CHECK(free_poisson_mixed_moment(alt(canonicalize(mono(text)))) ==
              moments[static_cast<std::size_t>(n - 1)]);
    }
}

TEST_CASE("rectangular limit moments") {
    const auto rf = std::get<RectAlternatingForm>(canonicalize(mono("H1* T[e] H1 U[e]")));
    const LimitValue v = rectangular_limit_moment_symbolic(rf);
    CHECK(v.evaluate(Rational(1)) == Rational(1, 4));       // c/(1+c)^2 at c=1
    CHECK(v.evaluate(Rational(2)) == Rational(2, 9));
    CHECK(rectangular_limit_moment(rf, Rational(1, 2)) == Rational(1, 2) / Rational(9, 4));

    CHECK(freeness_prediction(mono("H1")).is_zero());
    const auto rf_g1 = std::get<RectAlternatingForm>(canonicalize(mono("H1* T[g1] H1 U[e]")));
    CHECK(rectangular_limit_moment_symbolic(rf_g1).is_zero());
}

TEST_CASE("sum1 and sum2 assemblies agree") {
    const std::vector<std::string> suite = {
        "H1* T[e] H1 U[e]",
        "H1* T[g1] H1 U[e]",
        "H1* T[e] H1 U[g1]",
        "H1* T[e] H1 U[e] H1* T[e] H1 U[e]",
        "H1* T[e] H2 U[e] H2* T[e] H1 U[e]",
        "H1* T[g1] H1 U[e] H1* T[g1^-1] H1 U[e]",
        "H1* T[e] H1 U[g2] H1* T[e] H1 U[g2^-1]",
    };
    for (const auto& text : suite) {
        const auto c = canonicalize(mono(text));
        const auto& rf = std::get<RectAlternatingForm>(c);
        const LimitValue a = rectangular_limit_moment_symbolic(rf);
        const LimitValue b = rectangular_limit_moment_sum2(rf);
        INFO(text << ": sum1 = " << a.to_string() << ", sum2 = " << b.to_string());
        CHECK(a.equals(b));
    }
}

TEST_CASE("phi_tau multiplies cycle moments") {
    // moment functional: phi(A_{i1}...A_{ip}) modelled as product of indices + 100*len,
    // enough to distinguish groupings
    auto cycle_moment = [](const std::vector<int>& cyc) {
        long v = 100 * static_cast<long>(cyc.size());
        for (int a : cyc) v += a;
        return Rational(v);
    };
    const Perm tau = Perm::from_cycles(6, {{1, 3, 6}, {4, 5}});
    REQUIRE(is_noncrossing(tau));
    CHECK(phi_tau<Rational>(tau, cycle_moment) ==
          Rational(310) * Rational(102) * Rational(209));

    CHECK(phi_tau<Rational>(Perm::identity(3), cycle_moment) ==
          Rational(101) * Rational(102) * Rational(103));
    CHECK(phi_tau<Rational>(gamma_n(3), cycle_moment) == Rational(306));
    CHECK_THROWS_AS(phi_tau<Rational>(Perm::from_cycles(4, {{1, 3}, {2, 4}}), cycle_moment),
                    DomainError);
}

TEST_CASE("cumulant transform basics") {
    const std::vector<Rational> m1{Rational(5)};
    CHECK(cumulants_from_moments(m1)[0] == Rational(5));

    // k_2 = phi(AB) - phi(A)phi(B) in the univariate table
    const std::vector<Rational> m2{Rational(2), Rational(7)};
    CHECK(cumulants_from_moments(m2)[1] == Rational(7) - Rational(4));
}

TEST_CASE("cumulant and moment transforms invert each other") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> num(-12, 12);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Rational> moments;
        for (int n = 0; n < 6; ++n) moments.emplace_back(num(rng), 1 + (trial % 3));
        const auto kappa = cumulants_from_moments(moments);
        CHECK(moments_from_cumulants(kappa) == moments);
    }
}

TEST_CASE("freeness prediction dispatch") {
    CHECK(freeness_prediction(mono("U[g1.g1^-1]")).evaluate(Rational(1)) == 1);
    CHECK(freeness_prediction(mono("U[g1^2]")).is_zero());
    CHECK(freeness_prediction(mono("G1 U[e] G2* U[e]")).is_zero());
    CHECK(freeness_prediction(mono("W1 U[e] W1 U[e]")).evaluate(Rational(2)) == Rational(6));
    CHECK(freeness_prediction(mono("T[e]")).evaluate(Rational(1)) == Rational(1, 2));
    CHECK(freeness_prediction(mono("T[g1]")).is_zero());
    CHECK(freeness_prediction(mono("H1* T[e] H1 U[e]")).evaluate(Rational(1)) == Rational(1, 4));

    const Monomial mixed(Family::square, {Factor(GaussF{1, false}), Factor(UWordF{}),
                                          Factor(WishartF{1}), Factor(UWordF{})});
    CHECK_THROWS_AS(freeness_prediction(mixed), UnsupportedError);
}

TEST_CASE("mixed Gauss indices that cannot pair give zero") {
    // balanced stars, but the index pattern admits no matched pairing
    CHECK(circular_mixed_moment(alt(canonicalize(mono("G1 U[e] G1 U[e] G2* U[e] G2* U[e]")))) == 0);
    CHECK(circular_mixed_moment(alt(canonicalize(mono("G1 U[e] G1* U[e] G2 U[e] G2* U[e]")))) == 1);
}
