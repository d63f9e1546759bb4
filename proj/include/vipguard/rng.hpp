#pragma once

#include <cstdint>
#include <string_view>

namespace vipguard {

// Deterministic keyed random stream: the same (seed, label) pair produces the
// same sequence on every platform. Distinct labels give statistically
// independent streams, so every consumer (env, exploration noise, replay
// sampling, weight init, ...) derives its own stream instead of sharing one.
//
// xoshiro256++ state, filled from splitmix64 over seed ^ fnv1a(label).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Uniform integer in [0, bound); bound must be > 0. Rejection sampled,
    // so exactly unbiased.
    std::uint64_t uniform_int(std::uint64_t bound);
    // Gaussian via Box-Muller (cosine branch); consumes exactly two draws.
    double normal(double mean = 0.0, double stddev = 1.0);

private:
    std::uint64_t state_[4];
};

// Spec-level constructor name; identical to RngStream(seed, label).
inline RngStream derive_stream(std::uint64_t seed, std::string_view label) {
    return RngStream(seed, label);
}

}  // namespace vipguard
