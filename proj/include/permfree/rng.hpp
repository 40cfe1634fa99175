#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace permfree {

namespace detail {
// SplitMix64 finalizer; also used to mix stream keys.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}
}  // namespace detail

/// Stream roles keep draws for different ensemble pieces independent.
namespace rng_role {
inline constexpr std::uint64_t perm = 0x100;
inline constexpr std::uint64_t gauss_square = 0x200;
inline constexpr std::uint64_t gauss_wishart = 0x300;
inline constexpr std::uint64_t perm_rect_top = 0x400;
inline constexpr std::uint64_t gauss_rect = 0x500;
inline constexpr std::uint64_t perm_average = 0x600;
}  // namespace rng_role

/// Counter-based splittable random stream. A stream is fully determined by
/// (seed, sample_index, role), so parallel samplers can hand each work item
/// its own stream and results do not depend on the worker count.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t sample_index, std::uint64_t role) {
        std::uint64_t k = detail::mix64(seed + 0x9e3779b97f4a7c15ull);
        k = detail::mix64(k ^ (sample_index + 0xd1b54a32d192ed03ull));
        k = detail::mix64(k ^ (role + 0x8cb92ba72f3d8dd7ull));
        state_ = k;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return detail::mix64(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n), unbiased (rejection sampling).
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (UINT64_MAX / n) * n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= threshold);
        return x % n;
    }

    /// Complex standard Gaussian: real and imaginary parts N(0, 1/2).
    std::complex<double> next_complex_gaussian() {
        // Marsaglia polar method; one pair of N(0,1) per acceptance.
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-std::log(s) / s);  // sqrt(-2 ln s / s) / sqrt(2)
        return {u * m, v * m};
    }

private:
    std::uint64_t state_;
};

/// Worker count for data-parallel loops: PERMFREE_THREADS if set, else the
/// hardware concurrency. Results never depend on this value.
inline unsigned default_workers() {
    if (const char* env = std::getenv("PERMFREE_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Runs fn(i) for i in [0, count) on `workers` threads (0 = default_workers()).
/// fn must write only to per-index slots; chunking is static so there is no
/// scheduling nondeterminism to leak through buggy fns.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    if (workers == 0) workers = default_workers();
    if (workers > count) workers = count ? static_cast<unsigned>(count) : 1;
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Fixed-order pairwise reduction: the result depends only on the element
/// order, never on how the values were produced.
template <class T>
T pairwise_sum(const std::vector<T>& values, std::size_t lo, std::size_t hi) {
    if (hi - lo == 0) return T{};
    if (hi - lo == 1) return values[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(values, lo, mid) + pairwise_sum(values, mid, hi);
}

template <class T>
T pairwise_sum(const std::vector<T>& values) {
    return pairwise_sum(values, 0, values.size());
}

}  // namespace permfree
