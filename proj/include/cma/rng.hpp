#pragma once

#include <cmath>
#include <cstdint>

namespace cma {

/// Deterministic splittable RNG (splitmix64 core). Every sampling routine in
/// the library takes one of these; child streams derived via split() are
/// statistically independent of the parent and of each other, which keeps
/// per-sample work order-independent and safe to parallelize.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : state_(mix(seed ^ 0x6a09e667f3bcc908ull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform in [0, 1). 53-bit mantissa, platform-independent.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Uniform integer in [0, n), n >= 1. Rejection sampling, unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~0ull - (~0ull % n);
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    /// Exp(1) variate; used for Dirichlet(1) simplex weights.
    double next_exp() {
        double u = next_unit();
        return -std::log1p(-u);
    }

    /// Independent child stream. Does not advance this generator.
    SplitRng split(std::uint64_t stream) const {
        SplitRng child(0);
        child.state_ = mix(state_ ^ mix(stream + 0xd1b54a32d192ed03ull));
        return child;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace cma
