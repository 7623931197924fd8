#pragma once
#include <boost/math/distributions/normal.hpp>
#include <cstdint>

namespace ocmt {

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based stream: draw k is a pure function of (key, k), so any
/// draw can be reproduced without replaying the ones before it.
class CounterStream
{
public:
    constexpr CounterStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t role) noexcept
        : key_(mix64(mix64(mix64(seed) ^ replication) ^ role))
    {}

    constexpr std::uint64_t bits(std::uint64_t counter) const noexcept { return mix64(key_ ^ mix64(counter)); }

    /// Uniform on the open interval (0,1).
    constexpr double uniform(std::uint64_t counter) const noexcept
    {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by inverse-CDF transform of uniform(counter).
    double normal(std::uint64_t counter) const
    {
        static const boost::math::normal_distribution<double> standard;
        return boost::math::quantile(standard, uniform(counter));
    }

private:
    std::uint64_t key_;
};

} // namespace ocmt
