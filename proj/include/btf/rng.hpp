#pragma once

#include <cstdint>
#include <string_view>

namespace btf {

// All randomness in the project flows through this generator so that results
// are reproducible bit-for-bit across platforms.  The standard library's
// distributions are implementation-defined, so we roll the few we need by
// hand on top of xoshiro256++ (public-domain construction by Blackman/Vigna).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform double in [0, 1) with 53 random bits
    double uniform();
    // uniform double in [lo, hi)
    double uniform(double lo, double hi);
    // uniform integer in [0, n), rejection sampled (no modulo bias); n > 0
    std::uint64_t below(std::uint64_t n);
    // standard normal via Box-Muller; pairs are cached
    double normal();
    // true with probability 1/2
    bool coin();

private:
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Derives the seed of a named sub-stream from a master seed.  Every consumer
// of randomness owns a label, so adding a new consumer never perturbs the
// streams of existing ones.
std::uint64_t substream_seed(std::uint64_t master, std::string_view label);

} // namespace btf
