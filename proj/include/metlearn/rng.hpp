#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace metlearn {

/// SplitMix64: a 64-bit counter-based generator (Steele, Lea & Flood's
/// mixing function applied to a Weyl sequence). All randomized code in
/// this library draws from it so results are reproducible from a seed
/// alone. Normal variates use Box-Muller.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (lo, hi) endpoints excluded only in measure.
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the n used here (n << 2^64).
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; second variate cached.
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        // 1 - u in (0, 1] keeps the log argument away from zero.
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    /// Random sign, +1 or -1.
    double next_sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Derives an independent stream seed from a base seed and an index.
/// Used to hand each trial / draw / cell its own generator.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 g(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
    return g.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return derive_seed(derive_seed(seed, a, b), c);
}

}  // namespace metlearn
