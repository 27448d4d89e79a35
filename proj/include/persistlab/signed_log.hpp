#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace persistlab {

/// A real number stored as sign and natural log of its magnitude.
///
/// Values such as (x+1)^(2n+1) overflow a double long before the
/// interesting range of n, so every large-n magnitude in the library is
/// carried in this form. `log_abs` is meaningless when `sign == 0`.
struct SignedLogValue {
    int sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();

    static SignedLogValue zero() { return {}; }

    static SignedLogValue from_log(double log_abs, int sign = 1)
    {
        return sign == 0 ? zero() : SignedLogValue{sign > 0 ? 1 : -1, log_abs};
    }

    static SignedLogValue from_double(double v)
    {
        if (v == 0.0) return zero();
        return {v > 0.0 ? 1 : -1, std::log(std::abs(v))};
    }

    /// sign * exp(log_abs); overflows to +-inf outside double range.
    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

    bool is_zero() const { return sign == 0; }

    SignedLogValue operator*(const SignedLogValue& o) const
    {
        return from_log(log_abs + o.log_abs, sign * o.sign);
    }

    SignedLogValue operator/(const SignedLogValue& o) const
    {
        return from_log(log_abs - o.log_abs, sign * o.sign);
    }

    /// Multiply by exp(delta).
    SignedLogValue scaled(double delta) const { return from_log(log_abs + delta, sign); }
};

/// |a - b| / |b| computed without leaving log space. Both values must share a
/// nonzero sign; otherwise the discrepancy is reported as infinite.
inline double relative_difference(const SignedLogValue& a, const SignedLogValue& b)
{
    if (a.sign != b.sign || a.sign == 0)
        return (a.sign == 0 && b.sign == 0) ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(std::expm1(a.log_abs - b.log_abs));
}

/// Signed sum of terms sign_i * exp(log_i), anchored at the largest term.
/// Neumaier compensation keeps exact cancellations (e.g. 1 - 1) at zero.
inline SignedLogValue signed_log_sum(std::span<const double> log_terms, std::span<const int> signs)
{
    double anchor = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < log_terms.size(); ++i)
        if (signs[i] != 0) anchor = std::max(anchor, log_terms[i]);
    if (!std::isfinite(anchor)) return SignedLogValue::zero();

    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < log_terms.size(); ++i) {
        if (signs[i] == 0) continue;
        const double term = signs[i] * std::exp(log_terms[i] - anchor);
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    sum += comp;
    if (sum == 0.0) return SignedLogValue::zero();
    return {sum > 0.0 ? 1 : -1, anchor + std::log(std::abs(sum))};
}

/// log(exp(a) + exp(b)).
inline double log_add(double a, double b)
{
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

} // namespace persistlab
