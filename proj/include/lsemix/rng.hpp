#pragma once

#include <cstdint>

namespace lsemix {

// Deterministic 64-bit PRNG: xoshiro256++ seeded via splitmix64.
//
// The generator is fixed by this header rather than delegated to
// <random> so that a given seed yields the same draw sequence on every
// platform and standard-library implementation. Normal draws use the
// Marsaglia polar method (pair-based; the second value of each pair is
// cached). An Rng is single-owner mutable state; parallel workers must
// derive independent streams with child().
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [lo, hi). Requires lo < hi.
    double uniform(double lo, double hi);

    // Standard normal (mean 0, variance 1).
    double normal();

    // Uniform integer in [0, n). Requires n > 0. Lemire multiply-shift;
    // the O(n/2^64) bias is irrelevant at the index ranges used here.
    std::uint64_t next_below(std::uint64_t n);

    // Independent stream k, derived from this generator's original seed.
    // child(k) is a pure function of (seed, k): reordering or skipping
    // draws on the parent does not disturb the children.
    Rng child(std::uint64_t k) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lsemix
