#pragma once

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

namespace persistlab {

/// z such that P(|N| <= z) = level.
inline double two_sided_z(double level)
{
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("two_sided_z: level must lie in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
}

/// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_ci(std::uint64_t successes, std::uint64_t samples, double level = 0.95)
{
    if (samples == 0 || successes > samples) throw std::invalid_argument("wilson_ci: need 0 <= successes <= samples, samples > 0");
    const double z = two_sided_z(level);
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
    double lo = centre - half, hi = centre + half;
    // Pin the boundary cases, where rounding would otherwise leave 1e-17 slop.
    if (successes == 0) lo = 0.0;
    if (successes == samples) hi = 1.0;
    return {std::max(0.0, lo), std::min(1.0, hi)};
}

struct PersistenceEstimate {
    std::uint64_t successes = 0;
    std::uint64_t samples = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;

    static PersistenceEstimate from_counts(std::uint64_t successes, std::uint64_t samples, double level = 0.95)
    {
        PersistenceEstimate e;
        e.successes = successes;
        e.samples = samples;
        e.p_hat = static_cast<double>(successes) / static_cast<double>(samples);
        std::tie(e.ci_low, e.ci_high) = wilson_ci(successes, samples, level);
        return e;
    }

    double half_width() const { return 0.5 * (ci_high - ci_low); }

    /// Zero successes leave log p undefined; such estimates are kept for
    /// reporting but never enter a fit.
    bool usable_for_log() const { return successes > 0; }

    /// Delta-method standard error of log p_hat: sqrt((1-p)/(n p)).
    double log_stderr() const
    {
        if (!usable_for_log()) return std::numeric_limits<double>::infinity();
        return std::sqrt((1.0 - p_hat) / (static_cast<double>(samples) * p_hat));
    }
};

/// Two estimates of the same quantity agree when their difference is within
/// the quadrature sum of their 95% half-widths.
inline bool agree_within_combined_ci(const PersistenceEstimate& a, const PersistenceEstimate& b)
{
    return std::abs(a.p_hat - b.p_hat) <= std::hypot(a.half_width(), b.half_width());
}

inline bool agree_within_combined(double a, double half_a, double b, double half_b)
{
    return std::abs(a - b) <= std::hypot(half_a, half_b);
}

} // namespace persistlab
