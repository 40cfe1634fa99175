#pragma once

#include <vector>

#include "permfree/cpolynomial.hpp"
#include "permfree/errors.hpp"
#include "permfree/monomial.hpp"
#include "permfree/perm.hpp"
#include "permfree/word_cycles.hpp"

namespace permfree {

/// phi(U_w) for a word in Haar unitaries: 1 iff w = e.
inline long haar_word_moment(const FreeWord& w) { return w.is_identity() ? 1 : 0; }

/// phi_tau(A_1,...,A_n): the product over the cycles of a non-crossing tau of
/// the cycle moments. `cycle_moment` receives each cycle in canonical order.
template <class Value, class CycleMoment>
Value phi_tau(const Perm& tau, CycleMoment&& cycle_moment) {
    if (!is_noncrossing(tau)) throw DomainError("phi_tau: tau must be non-crossing");
    Value acc{1};
    for (const auto& cyc : cycle_decomposition(tau).cycles)
        acc = acc * cycle_moment(cyc);
    return acc;
}

/// m_n = sum over NC_n of the products of cycle cumulants. Input and output
/// tables are indexed by order-1 (kappa[0] = k_1).
template <class Value>
std::vector<Value> moments_from_cumulants(const std::vector<Value>& kappa) {
    std::vector<Value> moments;
    for (std::size_t n = 1; n <= kappa.size(); ++n) {
        Value m{0};
        auto stream = enumerate_noncrossing(static_cast<int>(n));
        while (auto tau = stream.next()) {
            Value k_tau{1};
            for (const auto& cyc : cycle_decomposition(*tau).cycles)
                k_tau = k_tau * kappa[cyc.size() - 1];
            m = m + k_tau;
        }
        moments.push_back(m);
    }
    return moments;
}

/// Inverse of moments_from_cumulants, via the defining recursion: the
/// single-cycle tau contributes k_n, everything else uses lower orders.
template <class Value>
std::vector<Value> cumulants_from_moments(const std::vector<Value>& moments) {
    std::vector<Value> kappa;
    for (std::size_t n = 1; n <= moments.size(); ++n) {
        Value rest{0};
        auto stream = enumerate_noncrossing(static_cast<int>(n));
        while (auto tau = stream.next()) {
            if (cycle_count(*tau) == 1) continue;
            Value k_tau{1};
            for (const auto& cyc : cycle_decomposition(*tau).cycles)
                k_tau = k_tau * kappa[cyc.size() - 1];
            rest = rest + k_tau;
        }
        kappa.push_back(moments[n - 1] - rest);
    }
    return kappa;
}

namespace detail {

inline std::vector<FreeWord> slot_words(const AlternatingForm& af) {
    std::vector<FreeWord> words;
    words.reserve(af.terms.size());
    for (const auto& t : af.terms) words.push_back(t.word);
    return words;
}

/// Cumulant of one cycle of tau for the standard circular family: only
/// k_2(G, G*) = k_2(G*, G) = 1 survive.
struct CircularCumulants {
    CPolynomial cycle(const AlternatingForm& af, const std::vector<int>& cyc) const {
        if (cyc.size() != 2) return {};
        const auto& a = af.terms[static_cast<std::size_t>(cyc[0] - 1)];
        const auto& b = af.terms[static_cast<std::size_t>(cyc[1] - 1)];
        if (a.r != b.r || a.star == b.star) return {};
        return CPolynomial::constant(1);
    }
};

/// Cumulant of one cycle for the free Poisson family: k_p(W_r,...,W_r) = c
/// for every order p, and mixed indices vanish.
struct FreePoissonCumulants {
    CPolynomial cycle(const AlternatingForm& af, const std::vector<int>& cyc) const {
        const int r0 = af.terms[static_cast<std::size_t>(cyc[0] - 1)].r;
        for (int a : cyc)
            if (af.terms[static_cast<std::size_t>(a - 1)].r != r0) return {};
        return CPolynomial::term(1);
    }
};

/// The moment/cumulant expansion for the alternating shape
/// X_1 U_{w_1} X_2 U_{w_2} ... X_n U_{w_n}:
///   phi = sum over tau in NC_n of k_tau(X's) * phi_{K(tau)}(U-words),
/// where phi_{K(tau)} of the U-words is 1 iff every Kreweras cycle word is e.
/// Both closed-form mixed-moment formulas are specializations of this one
/// code path, differing only in the cumulant family.
template <class Family>
CPolynomial mixed_moment_mom_cum(const AlternatingForm& af, const Family& family) {
    const int n = static_cast<int>(af.n());
    const std::vector<FreeWord> words = slot_words(af);
    const Perm gamma = gamma_n(n);
    CPolynomial total;
    auto stream = enumerate_noncrossing(n);
    while (auto tau = stream.next()) {
        CPolynomial k_tau = CPolynomial::constant(1);
        for (const auto& cyc : cycle_decomposition(*tau).cycles) {
            k_tau *= family.cycle(af, cyc);
            if (k_tau.is_zero()) break;
        }
        if (k_tau.is_zero()) continue;
        if (!all_cycle_words_identity(word_cycle_products(words, *tau, gamma))) continue;
        total += k_tau;
    }
    return total;
}

}  // namespace detail

/// phi(G_{r_1}^{e_1} U_{w_1} ... G_{r_n}^{e_n} U_{w_n}): the number of
/// non-crossing pairings with matched indices, opposite stars and all
/// Kreweras cycle words equal to e.
inline long circular_mixed_moment(const AlternatingForm& af) {
    if (!af.all_gauss())
        throw UnsupportedError("circular_mixed_moment expects Gauss/U-word factors only");
    const CPolynomial p = detail::mixed_moment_mom_cum(af, detail::CircularCumulants{});
    return p.coefficient(0).template convert_to<long>();
}

/// phi(W_{r_1} U_{w_1} ... W_{r_n} U_{w_n}) as a polynomial in c: the sum of
/// c^{#(tau)} over admissible non-crossing tau.
inline CPolynomial free_poisson_mixed_moment(const AlternatingForm& af) {
    if (!af.all_wishart())
        throw UnsupportedError("free_poisson_mixed_moment expects Wishart/U-word factors only");
    return detail::mixed_moment_mom_cum(af, detail::FreePoissonCumulants{});
}

/// Rectangular limit, assembled as sum over admissible non-crossing pairings
/// of c^{#(K(tau)_odd)} / (1+c)^{#(K(tau))}.
inline LimitValue rectangular_limit_moment_symbolic(const RectAlternatingForm& rf) {
    const int n = static_cast<int>(rf.two_k());
    std::vector<FreeWord> words;
    for (const auto& t : rf.terms) words.push_back(t.word);
    const Perm gamma = gamma_n(n);
    LimitValue total;
    auto stream = enumerate_nc_pairings(n);
    while (auto tau = stream.next()) {
        bool matched = true;
        for (int a = 1; a <= n; ++a)
            if (rf.terms[static_cast<std::size_t>(a - 1)].r !=
                rf.terms[static_cast<std::size_t>(tau->apply(a) - 1)].r)
                matched = false;
        if (!matched) continue;
        if (!all_cycle_words_identity(word_cycle_products(words, *tau, gamma))) continue;
        const Perm k = kreweras(*tau);
        const auto parity = parity_classify(k);
        total += LimitValue{CPolynomial::term(static_cast<unsigned>(parity.odd_cycle_count())),
                            static_cast<unsigned>(cycle_count(k))};
    }
    return total;
}

/// Same sum assembled the other way: per Kreweras cycle, a factor c/(1+c)
/// for odd-side cycles and 1/(1+c) for even-side ones. Must agree with the
/// symbolic form exactly (it differs by #(K_odd)+#(K_even)=#(K)).
inline LimitValue rectangular_limit_moment_sum2(const RectAlternatingForm& rf) {
    const int n = static_cast<int>(rf.two_k());
    std::vector<FreeWord> words;
    for (const auto& t : rf.terms) words.push_back(t.word);
    const Perm gamma = gamma_n(n);
    LimitValue total;
    auto stream = enumerate_nc_pairings(n);
    while (auto tau = stream.next()) {
        bool matched = true;
        for (int a = 1; a <= n; ++a)
            if (rf.terms[static_cast<std::size_t>(a - 1)].r !=
                rf.terms[static_cast<std::size_t>(tau->apply(a) - 1)].r)
                matched = false;
        if (!matched) continue;
        LimitValue term{CPolynomial::constant(1), 0};
        bool alive = true;
        for (const auto& [cyc, w] : word_cycle_products(words, *tau, gamma)) {
            if (!w.is_identity()) {
                alive = false;
                break;
            }
            const bool odd_side = cyc.front() % 2 == 1;
            term = term * (odd_side ? LimitValue{CPolynomial::term(1), 1}
                                    : LimitValue{CPolynomial::constant(1), 1});
        }
        if (alive) total += term;
    }
    return total;
}

inline Rational rectangular_limit_moment(const RectAlternatingForm& rf, const Rational& c) {
    return rectangular_limit_moment_symbolic(rf).evaluate(c);
}

/// Routes a monomial to the matching limit formula. Mixed Gauss+Wishart
/// monomials are rejected; the two families are treated separately.
inline LimitValue freeness_prediction(const Monomial& m) {
    const CanonicalMonomial canon = canonicalize(m);
    if (std::holds_alternative<ZeroForm>(canon)) return LimitValue::zero();
    if (const auto* pure = std::get_if<PureWord>(&canon)) {
        const long indicator = haar_word_moment(pure->w);
        switch (pure->side) {
            case WordSide::square_u: return LimitValue::constant(indicator);
            case WordSide::rect_t:
                // phi(T_w) = [w=e] * phi(P) = [w=e] * c/(1+c)
                return indicator ? LimitValue{CPolynomial::term(1), 1} : LimitValue::zero();
            case WordSide::rect_u:
                return indicator ? LimitValue{CPolynomial::constant(1), 1} : LimitValue::zero();
        }
    }
    if (const auto* af = std::get_if<AlternatingForm>(&canon)) {
        if (af->all_gauss())
            return LimitValue{detail::mixed_moment_mom_cum(*af, detail::CircularCumulants{}), 0};
        if (af->all_wishart())
            return LimitValue{detail::mixed_moment_mom_cum(*af, detail::FreePoissonCumulants{}), 0};
        throw UnsupportedError(
            "monomial mixes Gauss and Wishart factors; no joint limit model is defined");
    }
    return rectangular_limit_moment_symbolic(std::get<RectAlternatingForm>(canon));
}

}  // namespace permfree
