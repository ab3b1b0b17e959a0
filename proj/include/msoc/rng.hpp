#pragma once

#include <cstdint>

namespace msoc {

/// splitmix64: tiny counter-friendly generator used for reproducible
/// Monte Carlo streams. One instance per scenario keeps rollouts independent
/// of thread scheduling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Stream for scenario i under a root seed; identical for any evaluation
/// order, which makes threaded simulation byte-stable.
inline SplitMix64 scenario_stream(std::uint64_t seed, std::uint64_t scenario) {
    SplitMix64 mixer(seed ^ (0xD1342543DE82EF95ULL * (scenario + 1)));
    mixer.next();
    return SplitMix64(mixer.next());
}

} // namespace msoc
