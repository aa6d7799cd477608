#pragma once

#include <cstdint>
#include <random>

namespace volcast {

// Seeded random stream with a fixed, documented draw discipline so that
// identical seeds give identical streams across runs (and across platforms,
// up to libm differences in sin/cos/log).
//
// Draw order contract:
//   - uniform01() consumes one mt19937_64 output.
//   - normal() consumes two outputs per Box-Muller pair; the second normal of
//     a pair is cached and consumes nothing.
//   - derive(stream) depends only on the construction seed and `stream`,
//     never on how many draws were made.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01();

    // Uniform on (0, 1]; used for the Box-Muller radius so log() is safe.
    double uniform_open0();

    // Standard normal via Box-Muller on the seeded uniform stream.
    double normal();

    // Uniform integer in [0, n). Modulo reduction; the bias of 2^-64 * n is
    // irrelevant at the sizes used here and the mapping is fixed.
    int uniform_int(int n);

    // Independent child stream identified by `stream`. Stateless in the
    // number of draws already made on this object.
    Rng derive(uint64_t stream) const;

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

// SplitMix64 step; used for seed derivation.
uint64_t splitmix64(uint64_t x);

}  // namespace volcast
