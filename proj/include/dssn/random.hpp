#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dssn {

// Distribution helpers with a fixed, library-independent mapping from
// mt19937_64 output, so seeded runs reproduce across standard libraries.

inline double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

// Integer in [lo, hi].
inline int uniform_int(std::mt19937_64& rng, int lo, int hi)
{
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(rng() % span);
}

inline double standard_normal(std::mt19937_64& rng)
{
    double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dssn
