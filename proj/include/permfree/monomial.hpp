#pragma once

#include <string>
#include <variant>
#include <vector>

#include "permfree/errors.hpp"
#include "permfree/free_word.hpp"

namespace permfree {

enum class Family { square, rectangular };

// Monomial factors. The square family combines Haar-permutation words U_w
// with square Gaussians G_r and Wisharts W_r; the rectangular family
// combines top words T_w, bottom words U_w and the embedded rectangular
// Gaussians H_r.
struct UWordF {
    FreeWord w;
    friend bool operator==(const UWordF&, const UWordF&) = default;
};
struct TWordF {
    FreeWord w;
    friend bool operator==(const TWordF&, const TWordF&) = default;
};
struct GaussF {
    int r = 1;
    bool star = false;
    friend bool operator==(const GaussF&, const GaussF&) = default;
};
struct WishartF {
    int r = 1;
    friend bool operator==(const WishartF&, const WishartF&) = default;
};
struct HGaussF {
    int r = 1;
    bool star = false;
    friend bool operator==(const HGaussF&, const HGaussF&) = default;
};

using Factor = std::variant<UWordF, TWordF, GaussF, WishartF, HGaussF>;

/// An ordered product of factors. Adjacent word factors of the same kind are
/// merged on construction; beyond that the factor list is stored as given
/// (canonical rotation is `canonicalize`'s job).
class Monomial {
public:
    Monomial() = default;

    Monomial(Family family, std::vector<Factor> factors) : family_(family) {
        for (Factor& f : factors) append(std::move(f));
        validate_family();
    }

    Family family() const { return family_; }
    const std::vector<Factor>& factors() const { return factors_; }

    bool has_gauss() const { return count_kind<GaussF>() > 0; }
    bool has_wishart() const { return count_kind<WishartF>() > 0; }
    bool has_h() const { return count_kind<HGaussF>() > 0; }

    /// Largest generator index used by any word factor (0 if none).
    int max_generator() const {
        int m = 0;
        for (const Factor& f : factors_) {
            if (const auto* u = std::get_if<UWordF>(&f)) m = std::max(m, u->w.max_generator());
            if (const auto* t = std::get_if<TWordF>(&f)) m = std::max(m, t->w.max_generator());
        }
        return m;
    }

    /// Largest matrix-family index r used by any G/W/H factor (0 if none).
    int max_matrix_index() const {
        int m = 0;
        for (const Factor& f : factors_) {
            if (const auto* g = std::get_if<GaussF>(&f)) m = std::max(m, g->r);
            if (const auto* w = std::get_if<WishartF>(&f)) m = std::max(m, w->r);
            if (const auto* h = std::get_if<HGaussF>(&f)) m = std::max(m, h->r);
        }
        return m;
    }

    /// (AB)* = B*A*: reversed factors, each starred. W is self-adjoint and
    /// (U_w)* = U_{w^{-1}}.
    Monomial adjoint() const {
        std::vector<Factor> out;
        for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
            out.push_back(std::visit(
                [](const auto& f) -> Factor {
                    using F = std::decay_t<decltype(f)>;
                    if constexpr (std::is_same_v<F, UWordF>) return UWordF{f.w.inverse()};
                    else if constexpr (std::is_same_v<F, TWordF>) return TWordF{f.w.inverse()};
                    else if constexpr (std::is_same_v<F, GaussF>) return GaussF{f.r, !f.star};
                    else if constexpr (std::is_same_v<F, HGaussF>) return HGaussF{f.r, !f.star};
                    else return f;  // WishartF
                },
                *it));
        }
        return Monomial(family_, std::move(out));
    }

    std::string to_string() const {
        std::string out;
        for (const Factor& f : factors_) {
            if (!out.empty()) out += ' ';
            out += std::visit(
                [](const auto& v) -> std::string {
                    using F = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<F, UWordF>) return "U[" + v.w.to_string() + "]";
                    else if constexpr (std::is_same_v<F, TWordF>) return "T[" + v.w.to_string() + "]";
                    else if constexpr (std::is_same_v<F, GaussF>)
                        return "G" + std::to_string(v.r) + (v.star ? "*" : "");
                    else if constexpr (std::is_same_v<F, HGaussF>)
                        return "H" + std::to_string(v.r) + (v.star ? "*" : "");
                    else
                        return "W" + std::to_string(v.r);
                },
                f);
        }
        return out.empty() ? "U[e]" : out;
    }

    friend bool operator==(const Monomial&, const Monomial&) = default;

private:
    template <class F>
    std::size_t count_kind() const {
        std::size_t c = 0;
        for (const Factor& f : factors_)
            if (std::holds_alternative<F>(f)) ++c;
        return c;
    }

    void append(Factor f) {
        if (!factors_.empty()) {
            if (auto* u = std::get_if<UWordF>(&f)) {
                if (auto* prev = std::get_if<UWordF>(&factors_.back())) {
                    prev->w = prev->w.concat(u->w);
                    return;
                }
            }
            if (auto* t = std::get_if<TWordF>(&f)) {
                if (auto* prev = std::get_if<TWordF>(&factors_.back())) {
                    prev->w = prev->w.concat(t->w);
                    return;
                }
            }
        }
        factors_.push_back(std::move(f));
    }

    void validate_family() {
        for (const Factor& f : factors_) {
            const bool square_only =
                std::holds_alternative<GaussF>(f) || std::holds_alternative<WishartF>(f);
            const bool rect_only =
                std::holds_alternative<TWordF>(f) || std::holds_alternative<HGaussF>(f);
            if (family_ == Family::square && rect_only)
                throw ValidationError("square monomial cannot contain T/H factors");
            if (family_ == Family::rectangular && square_only)
                throw ValidationError("rectangular monomial cannot contain G/W factors");
        }
    }

    Family family_ = Family::square;
    std::vector<Factor> factors_;
};

// ---------------------------------------------------------------------------
// Canonical forms
// ---------------------------------------------------------------------------

/// The monomial is identically zero (rectangular block typing fails).
struct ZeroForm {};

enum class WordSide {
    square_u,  // word in the square Haar-permutation family
    rect_t,    // word in the rectangular top family (T_e is the projection P)
    rect_u,    // word in the rectangular bottom family (U_e is Q)
};

/// A monomial with no G/W/H factors left after merging: a single word.
struct PureWord {
    WordSide side = WordSide::square_u;
    FreeWord w;
};

enum class MatrixKind { gauss, wishart };

/// One slot of the square alternating shape X_{r}^{eps} U_{word}.
struct SquareTerm {
    MatrixKind kind = MatrixKind::gauss;
    int r = 1;
    bool star = false;  // Wisharts are self-adjoint; star is always false there
    FreeWord word;      // the U-word following this factor (possibly e)
};

/// X_{r_1}^{eps_1} U_{w_1} ... X_{r_n}^{eps_n} U_{w_n}, up to the cyclic
/// rotation of the trace. Kinds may mix G and W here; the moment formulas
/// reject mixtures.
struct AlternatingForm {
    std::vector<SquareTerm> terms;

    std::size_t n() const { return terms.size(); }
    bool all_gauss() const {
        for (const auto& t : terms)
            if (t.kind != MatrixKind::gauss) return false;
        return true;
    }
    bool all_wishart() const {
        for (const auto& t : terms)
            if (t.kind != MatrixKind::wishart) return false;
        return true;
    }
};

/// One slot of the rectangular alternating shape. Position a (1-based) holds
/// H*_{r_a} followed by a T-word when a is odd, H_{r_a} followed by a U-word
/// when a is even.
struct RectTerm {
    int r = 1;
    FreeWord word;
};

/// H*_{r_1} T_{w_1} H_{r_2} U_{w_2} ... H_{r_{2k-1}}* T_{w_{2k-1}} H_{r_{2k}} U_{w_{2k}}.
struct RectAlternatingForm {
    std::vector<RectTerm> terms;  // size 2k

    std::size_t two_k() const { return terms.size(); }
};

using CanonicalMonomial = std::variant<ZeroForm, PureWord, AlternatingForm, RectAlternatingForm>;

namespace detail {

inline CanonicalMonomial canonicalize_square(const std::vector<Factor>& factors) {
    // Pure word: concatenate (adjacent factors are pre-merged, but the list
    // may still hold several U-words if the monomial was built oddly).
    bool any_matrix = false;
    for (const Factor& f : factors)
        if (!std::holds_alternative<UWordF>(f)) any_matrix = true;
    if (!any_matrix) {
        FreeWord w;
        for (const Factor& f : factors) w = w.concat(std::get<UWordF>(f).w);
        return PureWord{WordSide::square_u, w};
    }

    // Rotate so the first factor is a G/W; the trace is cyclic.
    std::size_t start = 0;
    while (std::holds_alternative<UWordF>(factors[start])) ++start;

    AlternatingForm form;
    const std::size_t p = factors.size();
    for (std::size_t off = 0; off < p; ++off) {
        const Factor& f = factors[(start + off) % p];
        if (const auto* g = std::get_if<GaussF>(&f)) {
            form.terms.push_back({MatrixKind::gauss, g->r, g->star, FreeWord{}});
        } else if (const auto* wf = std::get_if<WishartF>(&f)) {
            form.terms.push_back({MatrixKind::wishart, wf->r, false, FreeWord{}});
        } else {
            // U-word: attach to the preceding matrix factor. Wrapped-around
            // leading words merge into the final slot here.
            auto& slot = form.terms.back().word;
            slot = slot.concat(std::get<UWordF>(f).w);
        }
    }
    return form;
}

enum class Side { top, bottom };

struct Arrow {
    Side dom, cod;
};

inline Arrow factor_arrow(const Factor& f) {
    if (std::holds_alternative<TWordF>(f)) return {Side::top, Side::top};
    if (std::holds_alternative<UWordF>(f)) return {Side::bottom, Side::bottom};
    const auto& h = std::get<HGaussF>(f);
    // H maps bottom coordinates to top ones; H* the reverse.
    return h.star ? Arrow{Side::top, Side::bottom} : Arrow{Side::bottom, Side::top};
}

inline CanonicalMonomial canonicalize_rectangular(const std::vector<Factor>& factors) {
    bool any_h = false, any_t = false, any_u = false;
    for (const Factor& f : factors) {
        any_h = any_h || std::holds_alternative<HGaussF>(f);
        any_t = any_t || std::holds_alternative<TWordF>(f);
        any_u = any_u || std::holds_alternative<UWordF>(f);
    }
    if (!any_h) {
        if (any_t && any_u) return ZeroForm{};  // disjoint block supports
        FreeWord w;
        for (const Factor& f : factors) {
            if (const auto* t = std::get_if<TWordF>(&f)) w = w.concat(t->w);
            if (const auto* u = std::get_if<UWordF>(&f)) w = w.concat(u->w);
        }
        return PureWord{any_t ? WordSide::rect_t : WordSide::rect_u, w};
    }

    // Block typing: the factor chain must compose, cyclically.
    const std::size_t p = factors.size();
    for (std::size_t i = 0; i < p; ++i) {
        const Arrow cur = factor_arrow(factors[i]);
        const Arrow next = factor_arrow(factors[(i + 1) % p]);
        if (cur.dom != next.cod) return ZeroForm{};
    }

    // Rotate to start at an H*; typing guarantees one exists.
    std::size_t start = 0;
    while (true) {
        const auto* h = std::get_if<HGaussF>(&factors[start]);
        if (h && h->star) break;
        ++start;
        if (start == p) return ZeroForm{};
    }

    RectAlternatingForm form;
    for (std::size_t off = 0; off < p; ++off) {
        const Factor& f = factors[(start + off) % p];
        if (const auto* h = std::get_if<HGaussF>(&f)) {
            const bool odd_slot = form.terms.size() % 2 == 0;  // next 1-based index is odd
            if (h->star != odd_slot) return ZeroForm{};
            form.terms.push_back({h->r, FreeWord{}});
        } else if (const auto* t = std::get_if<TWordF>(&f)) {
            if (form.terms.size() % 2 != 1) return ZeroForm{};  // T-words follow H*
            form.terms.back().word = form.terms.back().word.concat(t->w);
        } else {
            const auto& u = std::get<UWordF>(f);
            if (form.terms.size() % 2 != 0 || form.terms.empty()) return ZeroForm{};
            form.terms.back().word = form.terms.back().word.concat(u.w);
        }
    }
    if (form.terms.size() % 2 != 0) return ZeroForm{};
    return form;
}

}  // namespace detail

/// Rotates and merges a monomial into the alternating trace shape, or a pure
/// word, or Zero when the rectangular block pattern cannot be met.
inline CanonicalMonomial canonicalize(const Monomial& m) {
    if (m.factors().empty()) return PureWord{WordSide::square_u, FreeWord{}};
    if (m.family() == Family::square) return detail::canonicalize_square(m.factors());
    return detail::canonicalize_rectangular(m.factors());
}

}  // namespace permfree
