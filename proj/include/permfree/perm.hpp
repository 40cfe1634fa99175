#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "permfree/errors.hpp"
#include "permfree/free_word.hpp"

namespace permfree {

/// A permutation of [n] = {1,..,n}. Elements are 1-based everywhere in the
/// API; the vector offset is an internal detail. Values are immutable.
class Perm {
public:
    Perm() = default;

    static Perm identity(int n) {
        validate_n(n);
        std::vector<int> im(static_cast<std::size_t>(n));
        std::iota(im.begin(), im.end(), 1);
        return Perm(std::move(im), unchecked{});
    }

    /// From the image list: images[a-1] = p(a). Must be a bijection of [n].
    static Perm from_images(std::vector<int> images) {
        const int n = static_cast<int>(images.size());
        validate_n(n);
        std::vector<bool> seen(images.size(), false);
        for (int v : images) {
            if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)])
                throw ValidationError("image list is not a bijection of [n]");
            seen[static_cast<std::size_t>(v - 1)] = true;
        }
        return Perm(std::move(images), unchecked{});
    }

    /// From disjoint cycles; elements left out are fixed points.
    static Perm from_cycles(int n, const std::vector<std::vector<int>>& cycles) {
        Perm p = identity(n);
        for (const auto& cyc : cycles) {
            for (std::size_t i = 0; i < cyc.size(); ++i) {
                const int a = cyc[i];
                const int b = cyc[(i + 1) % cyc.size()];
                if (a < 1 || a > n) throw ValidationError("cycle element out of range");
                if (p.images_[static_cast<std::size_t>(a - 1)] != a)
                    throw ValidationError("cycles are not disjoint");
                p.images_[static_cast<std::size_t>(a - 1)] = b;
            }
        }
        return from_images(std::move(p.images_));
    }

    int size() const { return static_cast<int>(images_.size()); }
    int apply(int a) const { return images_[static_cast<std::size_t>(a - 1)]; }
    const std::vector<int>& images() const { return images_; }

    friend bool operator==(const Perm&, const Perm&) = default;
    /// Lexicographic on the image list; the enumeration order.
    friend auto operator<=>(const Perm&, const Perm&) = default;

private:
    struct unchecked {};
    Perm(std::vector<int> images, unchecked) : images_(std::move(images)) {}

    static void validate_n(int n) {
        if (n < 1) throw ValidationError("permutation size must be >= 1");
    }

    std::vector<int> images_;

    friend Perm compose(const Perm&, const Perm&);
    friend Perm inverse(const Perm&);
};

inline int fix_count(const Perm& p) {
    int fixed = 0;
    for (int a = 1; a <= p.size(); ++a)
        if (p.apply(a) == a) ++fixed;
    return fixed;
}

/// (p ∘ q)(a) = p(q(a)).
inline Perm compose(const Perm& p, const Perm& q) {
    if (p.size() != q.size()) throw ValidationError("compose: size mismatch");
    std::vector<int> im(static_cast<std::size_t>(p.size()));
    for (int a = 1; a <= p.size(); ++a) im[static_cast<std::size_t>(a - 1)] = p.apply(q.apply(a));
    return Perm::from_images(std::move(im));
}

inline Perm inverse(const Perm& p) {
    std::vector<int> im(static_cast<std::size_t>(p.size()));
    for (int a = 1; a <= p.size(); ++a) im[static_cast<std::size_t>(p.apply(a) - 1)] = a;
    return Perm::from_images(std::move(im));
}

/// The full cycle (1,2,...,n).
inline Perm gamma_n(int n) {
    std::vector<int> im(static_cast<std::size_t>(n));
    for (int a = 1; a <= n; ++a) im[static_cast<std::size_t>(a - 1)] = a % n + 1;
    return Perm::from_images(std::move(im));
}

/// (1,...,m)(m+1,...,m+n).
inline Perm gamma_mn(int m, int n) {
    if (m < 1 || n < 1) throw ValidationError("gamma_mn: block sizes must be >= 1");
    std::vector<int> im(static_cast<std::size_t>(m + n));
    for (int a = 1; a <= m; ++a) im[static_cast<std::size_t>(a - 1)] = a % m + 1;
    for (int a = 1; a <= n; ++a) im[static_cast<std::size_t>(m + a - 1)] = m + a % n + 1;
    return Perm::from_images(std::move(im));
}

/// Cycles partition [n]; each cycle is rotated minimum-first and cycles are
/// listed by increasing minimum. Fixed points appear as 1-cycles.
struct CycleDecomposition {
    std::vector<std::vector<int>> cycles;

    std::size_t cycle_count() const { return cycles.size(); }

    std::string to_string() const {
        std::string out;
        for (const auto& cyc : cycles) {
            out += '(';
            for (std::size_t i = 0; i < cyc.size(); ++i) {
                if (i) out += ',';
                out += std::to_string(cyc[i]);
            }
            out += ')';
        }
        return out;
    }
};

inline CycleDecomposition cycle_decomposition(const Perm& p) {
    CycleDecomposition dec;
    std::vector<bool> seen(static_cast<std::size_t>(p.size()), false);
    for (int a = 1; a <= p.size(); ++a) {
        if (seen[static_cast<std::size_t>(a - 1)]) continue;
        std::vector<int> cyc;
        int x = a;  // a is the smallest unvisited element, hence the cycle min
        do {
            cyc.push_back(x);
            seen[static_cast<std::size_t>(x - 1)] = true;
            x = p.apply(x);
        } while (x != a);
        dec.cycles.push_back(std::move(cyc));
    }
    return dec;
}

inline int cycle_count(const Perm& p) {
    std::vector<bool> seen(static_cast<std::size_t>(p.size()), false);
    int count = 0;
    for (int a = 1; a <= p.size(); ++a) {
        if (seen[static_cast<std::size_t>(a - 1)]) continue;
        ++count;
        int x = a;
        do {
            seen[static_cast<std::size_t>(x - 1)] = true;
            x = p.apply(x);
        } while (x != a);
    }
    return count;
}

inline bool is_pairing(const Perm& p) {
    for (int a = 1; a <= p.size(); ++a) {
        const int b = p.apply(a);
        if (b == a || p.apply(b) != a) return false;
    }
    return true;
}

/// #(tau) + #(tau^{-1} gamma_n) == n+1. The inequality <= n+1 holds always.
inline bool is_noncrossing(const Perm& p) {
    const int n = p.size();
    return cycle_count(p) + cycle_count(compose(inverse(p), gamma_n(n))) == n + 1;
}

/// Kreweras complement K(tau) = tau^{-1} gamma_n of a non-crossing tau.
inline Perm kreweras(const Perm& p) {
    if (!is_noncrossing(p)) throw DomainError("kreweras: permutation is crossing");
    return compose(inverse(p), gamma_n(p.size()));
}

enum class ParityKind { alternating, preserving, neither };

/// Parity behaviour of a permutation, with the odd/even restrictions when it
/// is parity preserving. Restrictions are relabelled: odd 2i-1 -> i, even
/// 2i -> i, acting on [ceil(n/2)] and [floor(n/2)] respectively.
class ParityClassification {
public:
    ParityKind kind() const { return kind_; }

    const Perm& odd_part() const {
        require_preserving();
        return *odd_;
    }
    const Perm& even_part() const {
        require_preserving();
        return *even_;
    }
    int odd_cycle_count() const { return cycle_count(odd_part()); }
    int even_cycle_count() const { return cycle_count(even_part()); }

    static ParityClassification classify(const Perm& p) {
        const int n = p.size();
        bool alternating = true, preserving = true;
        for (int a = 1; a <= n; ++a) {
            const bool flips = (a % 2) != (p.apply(a) % 2);
            alternating = alternating && flips;
            preserving = preserving && !flips;
        }
        ParityClassification out;
        if (alternating && n > 0) {
            out.kind_ = ParityKind::alternating;
        } else if (preserving) {
            out.kind_ = ParityKind::preserving;
            const int n_odd = (n + 1) / 2;
            const int n_even = n / 2;
            std::vector<int> odd_im(static_cast<std::size_t>(n_odd));
            std::vector<int> even_im(static_cast<std::size_t>(n_even));
            for (int i = 1; i <= n_odd; ++i)
                odd_im[static_cast<std::size_t>(i - 1)] = (p.apply(2 * i - 1) + 1) / 2;
            for (int i = 1; i <= n_even; ++i)
                even_im[static_cast<std::size_t>(i - 1)] = p.apply(2 * i) / 2;
            if (n_odd > 0) out.odd_ = Perm::from_images(std::move(odd_im));
            if (n_even > 0) out.even_ = Perm::from_images(std::move(even_im));
        } else {
            out.kind_ = ParityKind::neither;
        }
        return out;
    }

private:
    void require_preserving() const {
        if (kind_ != ParityKind::preserving || !odd_ || !even_)
            throw DomainError("parity restrictions exist only for parity-preserving permutations");
    }

    ParityKind kind_ = ParityKind::neither;
    std::optional<Perm> odd_;
    std::optional<Perm> even_;
};

inline ParityClassification parity_classify(const Perm& p) {
    return ParityClassification::classify(p);
}

/// Some orbit edge crosses between [1,m] and [m+1,m+n].
inline bool is_mn_connected(const Perm& p, int m, int n) {
    if (m < 1 || n < 1 || p.size() != m + n)
        throw ValidationError("is_mn_connected: block sizes do not match the permutation");
    for (int i = 1; i <= m; ++i)
        if (p.apply(i) > m) return true;
    for (int j = m + 1; j <= m + n; ++j)
        if (p.apply(j) <= m) return true;
    return false;
}

/// Exhaustive enumerators are capped here; 10! ~ 3.6M is the desk-scale line.
inline constexpr int kEnumerationCap = 10;

/// Lazily yields permutations of [n] in lexicographic order of the image
/// list, optionally filtered. Streams are independently restartable: each
/// constructed stream starts from the identity.
class PermStream {
public:
    enum class Filter { all, pairings, noncrossing, nc_pairings };

    PermStream(int n, Filter filter) : filter_(filter), current_(Perm::identity(check_budget(n))) {}

    /// Next qualifying permutation, or nullopt when exhausted.
    std::optional<Perm> next() {
        while (!done_) {
            Perm out = current_;
            advance();
            if (passes(out)) return out;
        }
        return std::nullopt;
    }

    std::vector<Perm> collect() {
        std::vector<Perm> all;
        while (auto p = next()) all.push_back(*p);
        return all;
    }

    std::size_t count() {
        std::size_t c = 0;
        while (next()) ++c;
        return c;
    }

private:
    static int check_budget(int n) {
        if (n < 1) throw ValidationError("enumeration requires n >= 1");
        if (n > kEnumerationCap)
            throw BudgetError("exhaustive enumeration capped at n <= " +
                              std::to_string(kEnumerationCap) + " (requested n = " +
                              std::to_string(n) + ")");
        return n;
    }

    bool passes(const Perm& p) const {
        switch (filter_) {
            case Filter::all: return true;
            case Filter::pairings: return is_pairing(p);
            case Filter::noncrossing: return is_noncrossing(p);
            case Filter::nc_pairings: return is_pairing(p) && is_noncrossing(p);
        }
        return false;
    }

    void advance() {
        std::vector<int> im = current_.images();
        if (std::next_permutation(im.begin(), im.end())) {
            current_ = Perm::from_images(std::move(im));
        } else {
            done_ = true;
        }
    }

    Filter filter_;
    Perm current_;
    bool done_ = false;
};

inline PermStream enumerate_permutations(int n) { return {n, PermStream::Filter::all}; }
inline PermStream enumerate_pairings(int n) { return {n, PermStream::Filter::pairings}; }
inline PermStream enumerate_noncrossing(int n) { return {n, PermStream::Filter::noncrossing}; }
inline PermStream enumerate_nc_pairings(int n) { return {n, PermStream::Filter::nc_pairings}; }

/// w(sigma_1,...,sigma_s): replace g_r by sigma_r. The word g_{r1}...g_{rk}
/// evaluates to sigma_{r1} ∘ ... ∘ sigma_{rk} with (p∘q)(a) = p(q(a)); the
/// empty word gives the identity of S_N.
inline Perm evaluate_word(const FreeWord& w, const std::vector<Perm>& sigmas) {
    if (sigmas.empty()) throw ValidationError("evaluate_word: need at least one permutation");
    const int n = sigmas.front().size();
    for (const Perm& s : sigmas)
        if (s.size() != n) throw ValidationError("evaluate_word: permutations act on different [N]");
    const int s = static_cast<int>(sigmas.size());
    if (w.max_generator() > s)
        throw ValidationError("evaluate_word: word uses generator g" +
                              std::to_string(w.max_generator()) + " but only " +
                              std::to_string(s) + " permutations given");

    std::vector<std::vector<int>> inv(sigmas.size());
    for (const Letter& l : w.letters()) {
        auto& table = inv[static_cast<std::size_t>(l.generator - 1)];
        if (l.sign < 0 && table.empty()) table = inverse(sigmas[static_cast<std::size_t>(l.generator - 1)]).images();
    }

    std::vector<int> im(static_cast<std::size_t>(n));
    const auto& letters = w.letters();
    for (int a = 1; a <= n; ++a) {
        int x = a;
        for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
            if (it->sign > 0)
                x = sigmas[static_cast<std::size_t>(it->generator - 1)].apply(x);
            else
                x = inv[static_cast<std::size_t>(it->generator - 1)][static_cast<std::size_t>(x - 1)];
        }
        im[static_cast<std::size_t>(a - 1)] = x;
    }
    return Perm::from_images(std::move(im));
}

}  // namespace permfree
