#include "coapcc/random.hpp"

#include <cmath>

namespace coapcc {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream RandomStream::derive(std::uint64_t scenario_seed, std::uint64_t node,
                                  RandomPurpose purpose, std::uint64_t extra) {
    std::uint64_t h = mix64(scenario_seed);
    h = mix64(h ^ node);
    h = mix64(h ^ static_cast<std::uint64_t>(purpose));
    h = mix64(h ^ extra);
    return RandomStream(h);
}

double RandomStream::exponential(double mean) {
    // 1 - u is in (0, 1], so the log is finite.
    return -mean * std::log(1.0 - uniform());
}

} // namespace coapcc
