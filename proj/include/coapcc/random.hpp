#pragma once

#include <cstdint>
#include <random>

namespace coapcc {

// Every consumer of randomness gets its own tag so that adding a new
// consumer never shifts the draws seen by an existing one.
enum class RandomPurpose : std::uint32_t {
    RtoDraw = 1,
    RtoDither = 2,
    LinkDelivery = 3,
    CsmaBackoff = 4,
    RdcWakeup = 5,
    TrafficPhase = 6,
    TrafficInterval = 7,
    Test = 99,
};

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the real-valued conversions below are
// done by hand so results do not depend on the library's distributions.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

    // Stream keyed by (scenario seed, node, purpose, extra).
    static RandomStream derive(std::uint64_t scenario_seed, std::uint64_t node,
                               RandomPurpose purpose, std::uint64_t extra = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double mean);

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix64(std::uint64_t x);

} // namespace coapcc
