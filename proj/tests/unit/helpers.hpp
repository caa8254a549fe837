#pragma once

#include "leslab/fields.hpp"

#include <cstdint>
#include <random>

namespace leslab::test {

/// Physical field with i.i.d. standard normal entries.
inline PhysicalField random_physical(const Grid& g, int components, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    PhysicalField f(g, components);
    for (auto& x : f.data)
        x = n(rng);
    return f;
}

inline double max_abs_diff(const PhysicalField& a, const PhysicalField& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double max_abs(const SpectralField& a)
{
    double m = 0.0;
    for (const auto& z : a.data)
        m = std::max(m, std::abs(z));
    return m;
}

}  // namespace leslab::test
