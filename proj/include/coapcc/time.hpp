#pragma once

#include <cmath>
#include <cstdint>

namespace coapcc {

/// Simulation clock in integer nanoseconds since simulation start.
using SimTime = std::int64_t;

inline constexpr SimTime kNanosPerSecond = 1'000'000'000;

inline SimTime from_seconds(double s) {
    return static_cast<SimTime>(std::llround(s * 1e9));
}

inline constexpr double to_seconds(SimTime t) {
    return static_cast<double>(t) / 1e9;
}

using NodeId = std::uint32_t;

} // namespace coapcc
