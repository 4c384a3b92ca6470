#include "satemis/rng.hpp"

#include <cmath>

namespace satemis {

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) {
        x = next_u64();
    }
    return x % n;
}

double Rng::normal(double mean, double stddev) {
    // Box-Muller, one variate per call; u1 nudged off zero for the log.
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    return mean + stddev * r * std::cos(theta);
}

long Rng::poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda <= 30.0) {
        // Exponential race: count arrivals until cumulative -ln(u) exceeds lambda.
        long k = 0;
        double sum = 0.0;
        for (;;) {
            double u = uniform01();
            if (u <= 0.0) u = 0x1.0p-53;
            sum += -std::log(u);
            if (sum > lambda) return k;
            ++k;
        }
    }
    // Rounded normal approximation for large rates.
    const double draw = normal(lambda, std::sqrt(lambda));
    const double rounded = std::floor(draw + 0.5);
    return rounded < 0.0 ? 0 : static_cast<long>(rounded);
}

Rng Rng::fork(std::uint64_t stream_index) const {
    Rng seeder(state_ ^ (0xA0761D6478BD642FULL * (stream_index + 1)));
    return Rng(seeder.next_u64());
}

}  // namespace satemis
