#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace pathspace {

/// Mixes a (seed, stream) pair into a fresh 64-bit state. Used to derive
/// independent deterministic streams (per level, per purpose) from one user
/// seed without any shared mutable state.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer applied to the pair; standard constants.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
/// is fixed by the standard) and implements its own uniform/normal/poisson
/// draws so results do not depend on library-specific distribution code.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

    /// Uniform on [0, 1): 53 random bits scaled, exactly reproducible.
    double u01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1): rejects exact zero so logs are safe.
    double u01_open() {
        double u;
        do {
            u = u01();
        } while (u == 0.0);
        return u;
    }

    /// Standard normal via Marsaglia's polar method (no cached spare, so the
    /// draw count per call is variable but the stream is still deterministic).
    double gaussian() {
        for (;;) {
            const double a = 2.0 * u01() - 1.0;
            const double b = 2.0 * u01() - 1.0;
            const double s = a * a + b * b;
            if (s > 0.0 && s < 1.0) {
                return a * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

    /// Poisson count by Knuth's product method; intended for moderate means
    /// (grid increments at desk scale), where it is exact and fast enough.
    std::uint64_t poisson(double mean) {
        if (mean < 0.0 || !std::isfinite(mean)) {
            throw std::domain_error("poisson: mean must be finite and nonnegative");
        }
        if (mean == 0.0) return 0;
        // Split large means so the running product never underflows.
        std::uint64_t total = 0;
        double remaining = mean;
        while (remaining > 30.0) {
            total += poisson(15.0);
            remaining -= 15.0;
        }
        const double threshold = std::exp(-remaining);
        std::uint64_t k = 0;
        double prod = u01_open();
        while (prod > threshold) {
            ++k;
            prod *= u01_open();
        }
        return total + k;
    }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::domain_error("below: n must be positive");
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = ~0ULL - (~0ULL % n);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v > limit);
        return v % n;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

} // namespace pathspace
