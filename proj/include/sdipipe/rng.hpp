#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace sdipipe {

// Counter-keyed deterministic generator (splitmix64 core). Every sampling
// site derives its own stream from (seed, device, day, purpose) keys, so
// outputs are identical under any partitioning of the work.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    static Rng keyed(std::initializer_list<uint64_t> keys) {
        uint64_t h = 0x2545f4914f6cdd1dull;
        for (uint64_t k : keys) h = mix(h ^ mix(k));
        return Rng(h);
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double mean) {
        double u = uniform();
        return -mean * std::log(1.0 - u);
    }

    double normal(double mu, double sigma) {
        // Box-Muller; consumes two draws, no cached spare (keeps streams
        // position-independent).
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Knuth product method; fine for the small rates used here.
    int poisson(double lambda) {
        if (lambda <= 0) return 0;
        double l = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > l && k < 1024);
        return k - 1;
    }

private:
    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t state_;
};

}  // namespace sdipipe
