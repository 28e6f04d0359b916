#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fairdiv/rational.hpp"

namespace fairdiv {

/// Seeded mt19937_64 behind portable bounded sampling. All randomness in the
/// engine and harness flows through this so identical seeds give identical
/// results on every platform (std::uniform_int_distribution is not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    /// Uniform permutation of {0..n-1} via Fisher-Yates.
    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
            std::swap(p[i], p[j]);
        }
        return p;
    }

    /// Non-negative rational with numerator in [0, max_num] and denominator
    /// in [1, max_den].
    Rational rational(int max_num, int max_den) {
        auto num = static_cast<long>(below(static_cast<std::uint64_t>(max_num) + 1));
        auto den = static_cast<long>(below(static_cast<std::uint64_t>(max_den))) + 1;
        return Rational(num, den);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace fairdiv
