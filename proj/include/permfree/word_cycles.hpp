#pragma once

#include <utility>
#include <vector>

#include "permfree/errors.hpp"
#include "permfree/free_word.hpp"
#include "permfree/perm.hpp"

namespace permfree {

/// For each cycle C = (a_1,...,a_p) of tau^{-1} gamma, the concatenated word
/// w_C = w_{a_1} w_{a_2} ... w_{a_p}. Returned with the cycles themselves
/// (canonical order) since callers often need the cycle structure too.
inline std::vector<std::pair<std::vector<int>, FreeWord>> word_cycle_products(
    const std::vector<FreeWord>& words, const Perm& tau, const Perm& gamma) {
    const int n = tau.size();
    if (gamma.size() != n || static_cast<int>(words.size()) != n)
        throw ValidationError("word_cycle_products: sizes of words, tau and gamma must agree");
    const Perm pi = compose(inverse(tau), gamma);
    std::vector<std::pair<std::vector<int>, FreeWord>> out;
    for (auto& cyc : cycle_decomposition(pi).cycles) {
        FreeWord w;
        for (int a : cyc) w = w.concat(words[static_cast<std::size_t>(a - 1)]);
        out.emplace_back(std::move(cyc), std::move(w));
    }
    return out;
}

inline bool all_cycle_words_identity(
    const std::vector<std::pair<std::vector<int>, FreeWord>>& cycle_words) {
    for (const auto& [cyc, w] : cycle_words)
        if (!w.is_identity()) return false;
    return true;
}

}  // namespace permfree
