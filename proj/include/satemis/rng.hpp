#pragma once

#include <cstdint>

namespace satemis {

// Deterministic random generator with a documented algorithm so fixture
// generation replays identically from an integer seed.
//
// Core stream: SplitMix64 (Steele, Lea, Flood 2014) —
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// Derived draws:
//   uniform01  = (next_u64() >> 11) * 2^-53, in [0, 1)
//   normal     = Box-Muller on two uniforms (r = sqrt(-2 ln u1))
//   poisson    = exponential race (sum of -ln u until > lambda) for
//                lambda <= 30, rounded normal approximation above.
//
// The integer stream is platform-exact; transformed draws additionally
// depend on libm rounding of sqrt/log/cos.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // [0, n)
    std::uint64_t next_below(std::uint64_t n);

    double normal(double mean = 0.0, double stddev = 1.0);

    long poisson(double lambda);

    // Independent sub-stream; distinct indices give decorrelated streams.
    Rng fork(std::uint64_t stream_index) const;

private:
    std::uint64_t state_;
};

}  // namespace satemis
