#pragma once

#include <cmath>
#include <cstdint>

namespace volterra {

/// Counter-based uniform generator: SplitMix64's output function evaluated at
/// an arbitrary 64-bit counter.  Every draw is a pure function of
/// (key, counter), so path simulation can hand each row its own stream and
/// stay independent of thread scheduling.
///
/// Algorithm identifier recorded in run manifests: "splitmix64-boxmuller-v1".
inline constexpr char kRngAlgorithm[] = "splitmix64-boxmuller-v1";

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    /// Stream for a given (seed, stream index) pair, e.g. one per path row.
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(splitmix64(splitmix64(seed) ^ (0x8000000000000000ULL | stream))), counter_(0) {}

    std::uint64_t next_u64() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform in (0,1), never exactly 0 or 1.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace volterra
