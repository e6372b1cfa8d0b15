#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace lpdsvm {

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ (mix64(tag) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

template <typename... Tags>
std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
    return combine_seed(combine_seed(seed, tag), rest...);
}

// Deterministic RNG wrapper. mt19937_64 is fully pinned by the standard, and
// the draw/shuffle algorithms below are spelled out here so sequences never
// depend on the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Unbiased uniform draw from [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// First k entries of a seeded permutation of {0, ..., n-1}.
inline std::vector<int> sample_without_replacement(std::size_t n, std::size_t k,
                                                   std::uint64_t seed) {
    std::vector<int> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<int>(i);
    Rng rng(seed);
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace lpdsvm
