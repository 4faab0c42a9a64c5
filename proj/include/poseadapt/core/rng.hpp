#pragma once

#include <cmath>
#include <cstdint>

namespace poseadapt {

/// Deterministic RNG (xoshiro256++ seeded through splitmix64).
/// Self-contained so that streams are bit-reproducible across platforms
/// and standard-library versions.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed) {
        uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    /// Independent stream derived from this rng's seed and a tag.
    Rng derive(uint64_t tag) const {
        uint64_t x = seed_ ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
        return Rng(splitmix64(x));
    }

    uint64_t u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    uint64_t uniform_int(uint64_t n) { return n ? u64() % n : 0; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (one value per call, deterministic).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mu, double sd) { return mu + sd * normal(); }

    uint64_t seed() const { return seed_; }

private:
    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t seed_ = 0;
    uint64_t s_[4] = {};
};

}  // namespace poseadapt
