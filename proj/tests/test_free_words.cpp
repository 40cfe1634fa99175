#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "permfree/free_word.hpp"
#include "permfree/perm.hpp"

using namespace permfree;

namespace {

FreeWord g(int r, int sign = +1) { return FreeWord::generator(r, sign); }

std::vector<Letter> random_letters(std::mt19937& rng, int s, int len) {
    std::uniform_int_distribution<int> gen(1, s);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<Letter> out;
    for (int i = 0; i < len; ++i) out.push_back({gen(rng), coin(rng) ? +1 : -1});
    return out;
}

Perm random_perm(std::mt19937& rng, int n) {
    std::vector<int> im(static_cast<std::size_t>(n));
    std::iota(im.begin(), im.end(), 1);
    std::shuffle(im.begin(), im.end(), rng);
    return Perm::from_images(std::move(im));
}

}  // namespace

TEST_CASE("reduce cancels inverse pairs") {
    CHECK(FreeWord::reduce({{1, +1}, {1, -1}}, 2).is_identity());
    CHECK(FreeWord::reduce({{1, +1}, {2, -1}, {2, +1}, {1, +1}}, 2) ==
          FreeWord::reduce({{1, +1}, {1, +1}}, 2));
    CHECK(FreeWord::reduce({}, 2).is_identity());
}

TEST_CASE("reduce validates generator range") {
    CHECK_THROWS_AS(FreeWord::reduce({{3, +1}}, 2), ValidationError);
    CHECK_THROWS_AS(FreeWord::reduce({{0, +1}}, 2), ValidationError);
}

TEST_CASE("reduce is idempotent on random letter lists") {
    std::mt19937 rng(20240811);
    for (int trial = 0; trial < 200; ++trial) {
        const auto letters = random_letters(rng, 3, trial % 12);
        const FreeWord once = FreeWord::reduce(letters, 3);
        CHECK(FreeWord::reduce(once.letters(), 3) == once);
    }
}

TEST_CASE("concat basics") {
    CHECK(g(1).concat(g(1, -1)).is_identity());
    CHECK(g(1).concat(g(2)).concat(g(2, -1)) == g(1));
    CHECK(FreeWord{}.concat(g(2)) == g(2));
    // associativity on a few fixed samples
    const FreeWord a = g(1), b = g(2, -1), c = g(1, -1);
    CHECK(a.concat(b).concat(c) == a.concat(b.concat(c)));
}

TEST_CASE("inverse") {
    CHECK(g(1).inverse() == g(1, -1));
    CHECK(g(1).concat(g(2)).inverse() == g(2, -1).concat(g(1, -1)));
    CHECK(FreeWord{}.inverse().is_identity());

    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const FreeWord w = FreeWord::reduce(random_letters(rng, 3, trial % 10), 3);
        CHECK(w.concat(w.inverse()).is_identity());
    }
}

TEST_CASE("evaluate_word basics") {
    const Perm swap12 = Perm::from_cycles(3, {{1, 2}});
    const Perm rot = Perm::from_cycles(3, {{1, 2, 3}});

    SECTION("empty word gives the identity") {
        const std::vector<Perm> sigmas{Perm::from_cycles(5, {{1, 5, 2}})};
        CHECK(evaluate_word(FreeWord{}, sigmas) == Perm::identity(5));
    }
    SECTION("single generator") {
        CHECK(evaluate_word(g(1), {swap12}) == swap12);
    }
    SECTION("g1^2 composes the permutation with itself") {
        const FreeWord w = g(1).concat(g(1));
        CHECK(evaluate_word(w, {rot}) == Perm::from_cycles(3, {{1, 3, 2}}));
    }
    SECTION("mismatched sizes fail") {
        CHECK_THROWS_AS(evaluate_word(g(1), {swap12, Perm::identity(4)}), ValidationError);
    }
    SECTION("missing generator family fails") {
        CHECK_THROWS_AS(evaluate_word(g(2), {swap12}), ValidationError);
    }
}

TEST_CASE("evaluate_word is a homomorphism") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 5;
        const std::vector<Perm> sigmas{random_perm(rng, n), random_perm(rng, n)};
        const FreeWord w1 = FreeWord::reduce(random_letters(rng, 2, 1 + trial % 6), 2);
        const FreeWord w2 = FreeWord::reduce(random_letters(rng, 2, 1 + trial % 5), 2);
        CHECK(evaluate_word(w1.concat(w2), sigmas) ==
              compose(evaluate_word(w1, sigmas), evaluate_word(w2, sigmas)));
    }
}

TEST_CASE("a word and its inverse fix the same points") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 6;
        const std::vector<Perm> sigmas{random_perm(rng, n), random_perm(rng, n)};
        const FreeWord w = FreeWord::reduce(random_letters(rng, 2, 1 + trial % 6), 2);
        CHECK(fix_count(evaluate_word(w, sigmas)) == fix_count(evaluate_word(w.inverse(), sigmas)));
    }
}

TEST_CASE("word text syntax") {
    CHECK(parse_word("e", 2).is_identity());
    CHECK(parse_word("g1.g2^-1.g1^2", 2) ==
          g(1).concat(g(2, -1)).concat(g(1)).concat(g(1)));
    CHECK(parse_word("g1.g1^-1", 2).is_identity());
    CHECK(parse_word("g2^3", 2).to_string() == "g2^3");

    CHECK(parse_word("g1.g2^-1.g1^2", 2).to_string() == "g1.g2^-1.g1^2");
    CHECK(FreeWord{}.to_string() == "e");

    CHECK_THROWS_AS(parse_word("g3", 2), ParseError);
    CHECK_THROWS_AS(parse_word("g1..g2", 2), ParseError);
    CHECK_THROWS_AS(parse_word("", 2), ParseError);
    CHECK_THROWS_AS(parse_word("h1", 2), ParseError);

    try {
        parse_word("g1.x2", 2);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 3);
    }
}
