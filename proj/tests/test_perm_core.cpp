#include <catch2/catch_amalgamated.hpp>

#include "permfree/perm.hpp"

using namespace permfree;

namespace {

long double_factorial(int n) {  // (n-1)!! for even n, via n -> (n-1)(n-3)...
    long acc = 1;
    for (int k = n - 1; k > 0; k -= 2) acc *= k;
    return acc;
}

long catalan(int k) {
    long acc = 1;
    for (int i = 0; i < k; ++i) acc = acc * 2 * (2 * i + 1) / (i + 2);
    return acc;
}

}  // namespace

TEST_CASE("fix_count") {
    CHECK(fix_count(Perm::identity(7)) == 7);
    CHECK(fix_count(Perm::from_cycles(2, {{1, 2}})) == 0);
    CHECK(fix_count(Perm::from_cycles(3, {{1, 2}})) == 1);
}

TEST_CASE("cycle decomposition is canonical") {
    CHECK(cycle_decomposition(Perm::identity(3)).to_string() == "(1)(2)(3)");
    CHECK(cycle_decomposition(Perm::identity(3)).cycle_count() == 3);

    const Perm p = Perm::from_cycles(3, {{1, 3, 2}});
    const auto dec = cycle_decomposition(p);
    CHECK(dec.cycle_count() == 1);
    CHECK(dec.cycles[0] == std::vector<int>{1, 3, 2});

    CHECK(cycle_decomposition(Perm::from_images({2, 1, 4, 3})).to_string() == "(1,2)(3,4)");
}

TEST_CASE("compose, inverse and the gammas") {
    CHECK(cycle_decomposition(gamma_n(4)).to_string() == "(1,2,3,4)");
    CHECK(cycle_decomposition(gamma_mn(2, 2)).to_string() == "(1,2)(3,4)");
    const Perm t = Perm::from_cycles(2, {{1, 2}});
    CHECK(compose(t, t) == Perm::identity(2));
    CHECK(inverse(gamma_n(5)) == compose(compose(gamma_n(5), gamma_n(5)),
                                         compose(gamma_n(5), gamma_n(5))));
    CHECK_THROWS_AS(compose(t, Perm::identity(3)), ValidationError);
}

TEST_CASE("is_pairing") {
    CHECK(is_pairing(Perm::from_cycles(4, {{1, 2}, {3, 4}})));
    CHECK_FALSE(is_pairing(Perm::identity(2)));
    auto all3 = enumerate_permutations(3);
    while (auto p = all3.next()) CHECK_FALSE(is_pairing(*p));
}

TEST_CASE("is_noncrossing via the cycle-count equality") {
    CHECK(is_noncrossing(Perm::from_cycles(4, {{1, 2}, {3, 4}})));
    CHECK_FALSE(is_noncrossing(Perm::from_cycles(4, {{1, 3}, {2, 4}})));
    for (int n = 1; n <= 6; ++n) CHECK(is_noncrossing(Perm::identity(n)));
}

TEST_CASE("kreweras complement") {
    const Perm tau = Perm::from_cycles(4, {{1, 2}, {3, 4}});
    CHECK(cycle_decomposition(kreweras(tau)).to_string() == "(1)(2,4)(3)");
    CHECK(kreweras(Perm::identity(5)) == gamma_n(5));
    CHECK(kreweras(gamma_n(5)) == Perm::identity(5));
    CHECK_THROWS_AS(kreweras(Perm::from_cycles(4, {{1, 3}, {2, 4}})), DomainError);
}

TEST_CASE("parity classification") {
    CHECK(parity_classify(Perm::from_cycles(4, {{1, 2}, {3, 4}})).kind() ==
          ParityKind::alternating);

    const auto k = parity_classify(kreweras(Perm::from_cycles(4, {{1, 2}, {3, 4}})));
    REQUIRE(k.kind() == ParityKind::preserving);
    CHECK(k.odd_part() == Perm::identity(2));       // (1)(3) relabelled
    CHECK(k.even_part() == Perm::from_cycles(2, {{1, 2}}));  // (2,4) relabelled
    CHECK(k.odd_cycle_count() + k.even_cycle_count() == 3);

    CHECK(parity_classify(Perm::from_cycles(3, {{1, 2, 3}})).kind() == ParityKind::neither);
    CHECK_THROWS_AS(parity_classify(Perm::from_cycles(4, {{1, 2}, {3, 4}})).odd_part(),
                    DomainError);
}

TEST_CASE("(m,n)-connectivity") {
    CHECK_FALSE(is_mn_connected(gamma_mn(2, 3), 2, 3));
    CHECK(is_mn_connected(Perm::from_cycles(4, {{1, 3}}), 2, 2));
    CHECK_FALSE(is_mn_connected(Perm::from_cycles(4, {{1, 2}, {3, 4}}), 2, 2));
    CHECK_THROWS_AS(is_mn_connected(Perm::identity(4), 3, 3), ValidationError);
}

TEST_CASE("enumeration counts") {
    CHECK(enumerate_pairings(4).count() == 3);
    CHECK(enumerate_noncrossing(3).count() == 5);
    CHECK(enumerate_noncrossing(4).count() == 14);
    CHECK(enumerate_nc_pairings(6).count() == 5);
    CHECK(enumerate_nc_pairings(3).count() == 0);
}

TEST_CASE("enumeration is lexicographic and restartable") {
    auto s1 = enumerate_permutations(3);
    std::vector<Perm> first = s1.collect();
    REQUIRE(first.size() == 6);
    CHECK(first.front() == Perm::identity(3));
    CHECK(first.back() == Perm::from_images({3, 2, 1}));
    CHECK(std::is_sorted(first.begin(), first.end()));

    auto s2 = enumerate_permutations(3);
    CHECK(s2.collect() == first);
}

TEST_CASE("enumeration budget") {
    CHECK_THROWS_AS(enumerate_permutations(11), BudgetError);
    CHECK_THROWS_AS(enumerate_noncrossing(0), ValidationError);
}

TEST_CASE("cycle-count bound over S_n, exhaustively") {
    for (int n = 1; n <= 7; ++n) {
        const Perm gamma = gamma_n(n);
        auto stream = enumerate_permutations(n);
        while (auto tau = stream.next()) {
            const int lhs = cycle_count(*tau) + cycle_count(compose(inverse(*tau), gamma));
            CHECK(lhs <= n + 1);
        }
    }
}

TEST_CASE("connected cycle-count bound over S_{m+n}, exhaustively") {
    for (int m = 1; m <= 4; ++m) {
        for (int n = 1; m + n <= 7; ++n) {
            const Perm gamma = gamma_mn(m, n);
            auto stream = enumerate_permutations(m + n);
            while (auto tau = stream.next()) {
                if (!is_mn_connected(*tau, m, n)) continue;
                const int lhs = cycle_count(*tau) + cycle_count(compose(inverse(*tau), gamma));
                CHECK(lhs <= m + n);
            }
        }
    }
}

TEST_CASE("Kreweras properties on NC_n") {
    for (int n = 1; n <= 7; ++n) {
        const Perm gamma = gamma_n(n);
        auto stream = enumerate_noncrossing(n);
        while (auto tau = stream.next()) {
            const Perm k = kreweras(*tau);
            CHECK(is_noncrossing(k));
            CHECK(cycle_count(*tau) + cycle_count(k) == n + 1);
            // K(K(tau)) is conjugation by gamma_n
            CHECK(kreweras(k) == compose(compose(inverse(gamma), *tau), gamma));
        }
    }
}

TEST_CASE("NC pairings alternate parity and their complements preserve it") {
    for (int n = 2; n <= 8; n += 2) {
        auto stream = enumerate_nc_pairings(n);
        while (auto tau = stream.next()) {
            CHECK(parity_classify(*tau).kind() == ParityKind::alternating);
            CHECK(parity_classify(kreweras(*tau)).kind() == ParityKind::preserving);
        }
    }
}

TEST_CASE("pairing and NC pairing counts match the closed forms") {
    for (int k = 1; k <= 4; ++k) {
        CHECK(enumerate_pairings(2 * k).count() ==
              static_cast<std::size_t>(double_factorial(2 * k)));
        CHECK(enumerate_nc_pairings(2 * k).count() == static_cast<std::size_t>(catalan(k)));
    }
}
