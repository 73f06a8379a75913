#pragma once

#include <cstdint>
#include <random>

namespace legdesign {

    using Rng = std::mt19937_64;

    // splitmix64 finalizer; used to derive independent per-candidate streams.
    constexpr std::uint64_t mix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
    {
        return mix64(mix64(mix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
    }

    inline double uniform(Rng& rng, double lo, double hi)
    {
        if (!(lo < hi))
            return lo;
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }

    inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

    inline double gaussian(Rng& rng, double sd)
    {
        if (sd <= 0.0)
            return 0.0;
        return std::normal_distribution<double>(0.0, sd)(rng);
    }

} // namespace legdesign
