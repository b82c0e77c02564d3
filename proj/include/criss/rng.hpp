#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string_view>
#include <vector>

namespace criss {

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a over bytes, seed folded in, splitmix finalized.
inline std::uint64_t hash64(std::string_view bytes, std::uint64_t seed = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

// Deterministic RNG. The engine sequence is pinned by the standard; the
// distributions are hand-rolled because std:: distribution outputs are
// implementation-defined and would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * (UINT64_MAX / n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // 53-bit uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Box-Muller; the spare keeps the stream deterministic and halves cost.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // Floyd's algorithm: k distinct indices from [0, n), returned sorted
    // ascending so callers that slice a sequence preserve relative order.
    std::vector<std::size_t> sample_sorted(std::size_t n, std::size_t k) {
        if (k >= n) {
            std::vector<std::size_t> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = i;
            return all;
        }
        std::set<std::size_t> chosen;
        for (std::size_t j = n - k; j < n; ++j) {
            const std::size_t t = static_cast<std::size_t>(below(j + 1));
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        return {chosen.begin(), chosen.end()};
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stateless gaussian keyed by (key, index): pure function, used where a
// value must depend only on its inputs and not on any draw order.
inline double keyed_gaussian(std::uint64_t key, std::uint64_t index) {
    const std::uint64_t a = mix64(key ^ mix64(index * 2 + 1));
    const std::uint64_t b = mix64(key ^ mix64(index * 2 + 2));
    double u1 = static_cast<double>((a >> 11) | 1ULL) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace criss
