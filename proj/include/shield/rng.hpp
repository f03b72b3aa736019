#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace shield {

// All randomness flows from one config seed. Each sampling path gets its own
// stream keyed by (seed, path index) so paths can run concurrently and shared
// noise between paired runs means "same (seed, path)". The normal generator
// is hand-pinned (mt19937_64 bits + Box-Muller) rather than
// std::normal_distribution, whose draw sequence is implementation-defined.

inline uint64_t splitmix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(uint64_t seed, uint64_t stream = 0)
        : eng_(splitmix64(splitmix64(seed) + stream)) {}

    // uniform on [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // one draw per call (no cached pair), so the stream position is a pure
    // function of the number of calls made
    double normal() {
        double u1 = 1.0 - uniform(); // (0,1]: keeps log() finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    uint64_t bits() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

} // namespace shield
