#pragma once

#include <compare>
#include <cstdlib>
#include <string>
#include <vector>

#include "permfree/errors.hpp"

namespace permfree {

/// One letter of a free-group word: generator index (1-based) and ±1 exponent.
struct Letter {
    int generator = 1;
    int sign = +1;

    friend bool operator==(const Letter&, const Letter&) = default;
    friend auto operator<=>(const Letter&, const Letter&) = default;
};

/// A reduced word over generators g_1..g_s and their inverses. The empty word
/// is the group identity e. Reduction (no adjacent x·x^{-1}) is an invariant:
/// every construction path reduces eagerly, and values are immutable.
class FreeWord {
public:
    FreeWord() = default;

    static FreeWord generator(int r, int sign = +1) {
        FreeWord w;
        w.letters_.push_back(Letter{r, sign});
        return w;
    }

    /// Cancels adjacent inverse pairs until stable. Throws if an index falls
    /// outside [1, s]; pass s = 0 to only require indices >= 1.
    static FreeWord reduce(const std::vector<Letter>& raw, int s = 0) {
        FreeWord w;
        for (const Letter& l : raw) {
            if (l.generator < 1 || (s > 0 && l.generator > s))
                throw ValidationError("generator index " + std::to_string(l.generator) +
                                      " out of range [1," + std::to_string(s) + "]");
            if (l.sign != +1 && l.sign != -1)
                throw ValidationError("letter exponent sign must be +1 or -1");
            w.push_reduced(l);
        }
        return w;
    }

    bool is_identity() const { return letters_.empty(); }
    std::size_t length() const { return letters_.size(); }
    const std::vector<Letter>& letters() const { return letters_; }

    /// Largest generator index appearing in the word (0 for e).
    int max_generator() const {
        int m = 0;
        for (const Letter& l : letters_) m = std::max(m, l.generator);
        return m;
    }

    FreeWord concat(const FreeWord& other) const {
        FreeWord w = *this;
        for (const Letter& l : other.letters_) w.push_reduced(l);
        return w;
    }

    FreeWord inverse() const {
        FreeWord w;
        for (auto it = letters_.rbegin(); it != letters_.rend(); ++it)
            w.letters_.push_back(Letter{it->generator, -it->sign});
        return w;  // reversal of a reduced word is reduced
    }

    /// Word syntax shared with the CLI: `e` or terms `g<idx>[^-1|^<int>]`
    /// joined by `.`, e.g. "g1.g2^-1.g1^2".
    std::string to_string() const {
        if (letters_.empty()) return "e";
        std::string out;
        std::size_t i = 0;
        while (i < letters_.size()) {
            std::size_t j = i;
            while (j < letters_.size() && letters_[j] == letters_[i]) ++j;
            const long run = static_cast<long>(j - i);
            const long exp = letters_[i].sign > 0 ? run : -run;
            if (!out.empty()) out += '.';
            out += 'g';
            out += std::to_string(letters_[i].generator);
            if (exp != 1) out += "^" + std::to_string(exp);
            i = j;
        }
        return out;
    }

    friend bool operator==(const FreeWord&, const FreeWord&) = default;
    friend auto operator<=>(const FreeWord&, const FreeWord&) = default;

private:
    void push_reduced(const Letter& l) {
        if (!letters_.empty() && letters_.back().generator == l.generator &&
            letters_.back().sign == -l.sign) {
            letters_.pop_back();
        } else {
            letters_.push_back(l);
        }
    }

    std::vector<Letter> letters_;
};

inline FreeWord concat(const FreeWord& a, const FreeWord& b) { return a.concat(b); }
inline FreeWord inverse(const FreeWord& w) { return w.inverse(); }

namespace detail {

inline std::size_t parse_index(const std::string& text, std::size_t& pos, std::size_t base) {
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
        throw ParseError("expected generator index", base + pos);
    std::size_t v = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        v = v * 10 + static_cast<std::size_t>(text[pos] - '0');
        if (v > 1000000) throw ParseError("index too large", base + pos);
        ++pos;
    }
    return v;
}

}  // namespace detail

/// Parses the word mini-language. `offset_base` shifts reported byte offsets
/// when the word is embedded in a larger source string (the monomial parser).
inline FreeWord parse_word(const std::string& text, int s, std::size_t offset_base = 0) {
    if (text == "e") return FreeWord{};
    if (text.empty()) throw ParseError("empty word (use 'e' for the identity)", offset_base);
    std::vector<Letter> letters;
    std::size_t pos = 0;
    while (true) {
        if (text[pos] != 'g') throw ParseError("expected 'g'", offset_base + pos);
        ++pos;
        const int idx = static_cast<int>(detail::parse_index(text, pos, offset_base));
        if (idx < 1 || (s > 0 && idx > s))
            throw ParseError("generator index g" + std::to_string(idx) + " out of range [1," +
                                 std::to_string(s) + "]",
                             offset_base + pos);
        long exp = 1;
        if (pos < text.size() && text[pos] == '^') {
            ++pos;
            bool neg = false;
            if (pos < text.size() && text[pos] == '-') {
                neg = true;
                ++pos;
            }
            const long mag = static_cast<long>(detail::parse_index(text, pos, offset_base));
            if (mag == 0) throw ParseError("zero exponent", offset_base + pos);
            exp = neg ? -mag : mag;
        }
        const int sign = exp > 0 ? +1 : -1;
        for (long k = 0; k < std::labs(exp); ++k) letters.push_back(Letter{idx, sign});
        if (pos == text.size()) break;
        if (text[pos] != '.') throw ParseError("expected '.' between terms", offset_base + pos);
        ++pos;
        if (pos == text.size()) throw ParseError("trailing '.'", offset_base + pos);
    }
    return FreeWord::reduce(letters, s);
}

}  // namespace permfree
