#pragma once

#include <cstdint>
#include <vector>

namespace provlab {

/**
Deterministic splitmix64 generator with keyed sub-stream derivation.

The std <random> engines are portable but the distributions are not
(their algorithms are implementation-defined), so experiment replays
would not be byte-identical across toolchains. Everything here is fully
specified: the same (seed, stream) key yields the same draws everywhere.
*/
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Stable derivation of per-(experiment, instance, trial) stream seeds.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
        std::uint64_t h = mix(seed ^ 0x9e3779b97f4a7c15ull);
        h = mix(h ^ a);
        h = mix(h ^ b);
        h = mix(h ^ c);
        return h;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // {0, ..., n-1}; modulo bias is negligible at desk scale
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    bool bernoulli(double p) { return uniform() < p; }

    // categorical draw by CDF walk; probs expected to sum to ~1
    int sample(const std::vector<double>& probs) {
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

}  // namespace provlab
