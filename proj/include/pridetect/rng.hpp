#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pridetect/errors.hpp"

namespace pridetect {

// SplitMix64 finalizer; used to mix seed material.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, used to fold human-readable scope names into seed material.
inline std::uint64_t hash64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive a child seed from a root seed, a scope label ("train/gambling",
// "cell/plain/none/noclick/...") and an index. Stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view scope, std::uint64_t index) {
    return splitmix64(root ^ splitmix64(hash64(scope) + 0x9e3779b97f4a7c15ULL * (index + 1)));
}

// Deterministic RNG. mt19937_64's raw output sequence is pinned by the
// standard, and every range conversion below is implemented by hand, so the
// same seed yields identical draws on any platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t u64() { return engine_(); }

    // Uniform double in [0, 1), 53 bits of mantissa.
    double real01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi], inclusive, unbiased (rejection sampling).
    long uniform_int(long lo, long hi) {
        if (lo > hi) throw ArgumentError("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return lo + static_cast<long>(u64()); // full 64-bit range
        const std::uint64_t limit = (UINT64_MAX / span) * span;
        std::uint64_t r;
        do {
            r = u64();
        } while (r >= limit);
        return lo + static_cast<long>(r % span);
    }

    std::size_t index(std::size_t size) {
        if (size == 0) throw ArgumentError("index: empty collection");
        return static_cast<std::size_t>(uniform_int(0, static_cast<long>(size) - 1));
    }

    // Sample an index with probability proportional to the (non-negative)
    // weights. Requires a strictly positive total.
    std::size_t weighted(const Eigen::ArrayXd& weights) {
        const double total = weights.sum();
        if (!(total > 0.0)) throw ArgumentError("weighted: weights sum to zero");
        double r = real01() * total;
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0.0) return static_cast<std::size_t>(i);
        }
        return static_cast<std::size_t>(weights.size() - 1);
    }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[index(items.size())];
    }

    // Fisher-Yates shuffle using this engine's draws only.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace pridetect
