#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "permfree/errors.hpp"
#include "permfree/monomial.hpp"

namespace permfree {

/// Parses the monomial mini-language:
///   monomial := factor (SP factor)*
///   factor   := 'G'IDX['*'] | 'W'IDX | 'H'IDX['*'] | 'U['word']' | 'T['word']'
///   word     := 'e' | term('.'term)*
///   term     := 'g'IDX['^-1' | '^'INT]
/// Diagnostics carry the byte offset of the offending character.
inline Monomial parse_monomial(const std::string& text, int s) {
    if (s < 1) throw ValidationError("s must be >= 1");
    std::vector<Factor> factors;
    bool any_gauss = false, any_wishart = false, any_rect = false;
    std::size_t pos = 0;

    auto skip_spaces = [&] {
        while (pos < text.size() && text[pos] == ' ') ++pos;
    };

    auto parse_matrix_index = [&](const char* what) {
        const std::size_t at = pos;
        const int idx = static_cast<int>(detail::parse_index(text, pos, 0));
        if (idx < 1 || idx > s)
            throw ParseError(std::string(what) + " index " + std::to_string(idx) +
                                 " out of range [1," + std::to_string(s) + "]",
                             at);
        return idx;
    };

    auto parse_bracketed_word = [&](const char* what) {
        if (pos >= text.size() || text[pos] != '[')
            throw ParseError(std::string("expected '[' after ") + what, pos);
        ++pos;
        const std::size_t word_begin = pos;
        const std::size_t close = text.find(']', pos);
        if (close == std::string::npos) throw ParseError("unterminated '['", word_begin - 1);
        FreeWord w = parse_word(text.substr(word_begin, close - word_begin), s, word_begin);
        pos = close + 1;
        return w;
    };

    skip_spaces();
    if (pos == text.size()) throw ParseError("empty monomial", pos);

    while (pos < text.size()) {
        const char head = text[pos];
        ++pos;
        switch (head) {
            case 'G': {
                const int r = parse_matrix_index("G");
                bool star = pos < text.size() && text[pos] == '*';
                if (star) ++pos;
                factors.push_back(GaussF{r, star});
                any_gauss = true;
                break;
            }
            case 'W': {
                const int r = parse_matrix_index("W");
                factors.push_back(WishartF{r});
                any_wishart = true;
                break;
            }
            case 'H': {
                const int r = parse_matrix_index("H");
                bool star = pos < text.size() && text[pos] == '*';
                if (star) ++pos;
                factors.push_back(HGaussF{r, star});
                any_rect = true;
                break;
            }
            case 'U': factors.push_back(UWordF{parse_bracketed_word("U")}); break;
            case 'T': {
                factors.push_back(TWordF{parse_bracketed_word("T")});
                any_rect = true;
                break;
            }
            default:
                throw ParseError(std::string("unexpected character '") + head +
                                     "' (expected G, W, H, U or T)",
                                 pos - 1);
        }
        if (pos < text.size()) {
            if (text[pos] != ' ')
                throw ParseError("expected space between factors", pos);
            skip_spaces();
            if (pos == text.size()) break;  // trailing spaces are fine
        }
    }

    if (any_rect && (any_gauss || any_wishart))
        throw ValidationError("monomial mixes square (G/W) and rectangular (H/T) factors");
    if (any_gauss && any_wishart)
        throw ValidationError("monomial mixes Gauss and Wishart factors; the two models are separate");

    return Monomial(any_rect ? Family::rectangular : Family::square, std::move(factors));
}

}  // namespace permfree
