#pragma once

// The binomial-weighted random polynomial f_n(x) = sum_i C(n,i) a_i x^i,
// its normalized form g_n(x) = (x+1)^-n f_n(x), the variance kernel
// M_n(x) = sum_i C(n,i)^2 x^(2i) and the t-domain transform
// x = tan^2(t / (2 sqrt n)) under which f_n looks stationary.

#include "persistlab/random.hpp"
#include "persistlab/signed_log.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace persistlab {

/// Degree n plus raw coefficients a_0..a_n (before binomial weighting).
class BinomialPolynomial {
public:
    explicit BinomialPolynomial(std::vector<double> coefficients) : a_(std::move(coefficients))
    {
        if (a_.empty()) throw std::invalid_argument("BinomialPolynomial: needs at least one coefficient");
        for (double c : a_)
            if (!std::isfinite(c)) throw std::invalid_argument("BinomialPolynomial: non-finite coefficient");
    }

    int degree() const { return static_cast<int>(a_.size()) - 1; }
    const std::vector<double>& coefficients() const { return a_; }
    double operator[](std::size_t i) const { return a_[i]; }

    /// Coefficients in reverse order: the law-preserving map f_n(x) -> x^n f_n(1/x).
    BinomialPolynomial reversed() const { return BinomialPolynomial({a_.rbegin(), a_.rend()}); }

private:
    std::vector<double> a_;
};

/// Coefficient k of the polynomial is filled by the draw at position
/// `draw_position(k)`. Draws alternate between the two ends (a_0, a_n, a_1,
/// a_{n-1}, ...) so that Monte Carlo code can reject on boundary signs
/// before paying for the interior.
inline std::size_t draw_position(std::size_t index, std::size_t n)
{
    const std::size_t from_low = index, from_high = n - index;
    return from_low <= from_high ? 2 * from_low : 2 * from_high + 1;
}

/// Lazily materialized coefficients of one sampled f_n. Requesting any range
/// yields exactly the values a full `sample_polynomial` on the same stream
/// would produce.
class LazyCoefficients {
public:
    /// With `reversed`, draw k lands where a full sample would put draw k of
    /// the mirrored sequence, i.e. the stream produces a_n, ..., a_0.
    LazyCoefficients(int n, RngStream stream, bool reversed = false)
        : n_(n), stream_(std::move(stream)), a_(n + 1, 0.0), reversed_(reversed)
    {
        if (n < 0) throw std::invalid_argument("LazyCoefficients: negative degree");
    }

    int degree() const { return n_; }

    /// Make a_i available for all i in [0, lo_end) and (n - hi_count, n].
    void ensure_ends(int lo_end, int hi_count)
    {
        while ((lo_ready_ < lo_end || hi_ready_ < hi_count) && !complete()) draw_next();
    }

    void ensure_index(int i)
    {
        if (i <= n_ - i)
            ensure_ends(i + 1, 0);
        else
            ensure_ends(0, n_ - i + 1);
    }

    void ensure_all()
    {
        while (!complete()) draw_next();
    }

    bool complete() const { return lo_ready_ + hi_ready_ >= n_ + 1; }

    double operator[](int i) const { return a_[i]; }
    const std::vector<double>& values() const { return a_; }

    BinomialPolynomial materialize()
    {
        ensure_all();
        return BinomialPolynomial(a_);
    }

private:
    void draw_next()
    {
        const bool low_turn = ((lo_ready_ + hi_ready_) % 2 == 0) != reversed_;
        const double v = stream_.normal();
        if (low_turn)
            a_[lo_ready_++] = v;
        else
            a_[n_ - hi_ready_++] = v;
    }

    int n_;
    RngStream stream_;
    std::vector<double> a_;
    bool reversed_ = false;
    int lo_ready_ = 0;
    int hi_ready_ = 0;
};

/// n+1 i.i.d. standard normal coefficients drawn from `stream`.
inline BinomialPolynomial sample_polynomial(int n, RngStream& stream)
{
    if (n < 0) throw std::invalid_argument("sample_polynomial: negative degree");
    std::vector<double> a(n + 1);
    int lo = 0, hi = n;
    for (int k = 0; k <= n; ++k) {
        if (k % 2 == 0)
            a[lo++] = stream.normal();
        else
            a[hi--] = stream.normal();
    }
    return BinomialPolynomial(std::move(a));
}

/// log C(n, i) for i = 0..n, accumulated in extended precision from the
/// ratios C(n,i)/C(n,i-1) = (n-i+1)/i and mirrored so the table is exactly
/// symmetric.
class LogBinomialTable {
public:
    explicit LogBinomialTable(int n) : n_(n), log_c_(n + 1, 0.0)
    {
        if (n < 0) throw std::invalid_argument("LogBinomialTable: negative n");
        long double acc = 0.0L;
        for (int i = 1; i <= n / 2; ++i) {
            acc += std::log(static_cast<long double>(n - i + 1)) - std::log(static_cast<long double>(i));
            log_c_[i] = acc;
        }
        for (int i = n / 2 + 1; i <= n; ++i) log_c_[i] = log_c_[n - i];
    }

    int n() const { return n_; }
    double operator[](int i) const { return static_cast<double>(log_c_[i]); }
    long double extended(int i) const { return log_c_[i]; }

private:
    int n_;
    std::vector<long double> log_c_;
};

/// f_n(x) in sign/log form.
inline SignedLogValue eval_f(const BinomialPolynomial& p, double x, const LogBinomialTable& lb)
{
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("eval_f: x must be positive and finite");
    const int n = p.degree();
    const double lx = std::log(x);
    std::vector<double> logs(n + 1);
    std::vector<int> signs(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double a = p[i];
        signs[i] = (a > 0) - (a < 0);
        logs[i] = signs[i] == 0 ? 0.0 : lb[i] + std::log(std::abs(a)) + i * lx;
    }
    return signed_log_sum(logs, signs);
}

inline SignedLogValue eval_f(const BinomialPolynomial& p, double x)
{
    return eval_f(p, x, LogBinomialTable(p.degree()));
}

/// g_n(x) = (x+1)^-n f_n(x).
inline SignedLogValue eval_g(const BinomialPolynomial& p, double x, const LogBinomialTable& lb)
{
    return eval_f(p, x, lb).scaled(-p.degree() * std::log1p(x));
}

inline SignedLogValue eval_g(const BinomialPolynomial& p, double x)
{
    return eval_g(p, x, LogBinomialTable(p.degree()));
}

namespace detail {

// Terms of M_n(x) are log-concave in i, so the sum can start at the mode and
// stop on each side once a term falls this far below the anchor; the neglected
// mass is below (n+1) e^-80 relative.
inline constexpr double kKernelTailCut = 80.0;

inline long double kernel_log_term(const LogBinomialTable& lb, int i, long double two_log_x)
{
    return 2.0L * lb.extended(i) + i * two_log_x;
}

} // namespace detail

/// M_n(x) = sum_i C(n,i)^2 x^(2i), summed outward from its largest term.
inline SignedLogValue mn_exact(const LogBinomialTable& lb, double x)
{
    const int n = lb.n();
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("mn_exact: x must be positive and finite");
    // Extended precision throughout: log M_n reaches ~2.8e6 at n = 10^6, so
    // double terms would lose digits the final rounding keeps.
    const long double tlx = 2.0L * std::log(static_cast<long double>(x));

    // Mode of C(n,i) x^i sits near (n x - 1)/(x + 1); polish locally.
    int mode = static_cast<int>(std::floor((n * x - 1.0) / (x + 1.0)));
    mode = std::clamp(mode, 0, n);
    auto term = [&](int i) { return detail::kernel_log_term(lb, i, tlx); };
    while (mode < n && term(mode + 1) > term(mode)) ++mode;
    while (mode > 0 && term(mode - 1) > term(mode)) --mode;

    const long double anchor = term(mode);
    long double sum = 1.0L;
    for (int i = mode + 1; i <= n; ++i) {
        const long double d = term(i) - anchor;
        if (d < -detail::kKernelTailCut) break;
        sum += std::exp(d);
    }
    for (int i = mode - 1; i >= 0; --i) {
        const long double d = term(i) - anchor;
        if (d < -detail::kKernelTailCut) break;
        sum += std::exp(d);
    }
    return SignedLogValue::from_log(static_cast<double>(anchor + std::log(sum)));
}

inline SignedLogValue mn_exact(int n, double x)
{
    if (n < 1) throw std::invalid_argument("mn_exact: n must be positive");
    return mn_exact(LogBinomialTable(n), x);
}

/// (n^-1/6, n^1/6): where the large-n closed form of M_n is trusted.
inline std::pair<double, double> asymptotic_window(int n)
{
    const double lo = std::pow(static_cast<double>(n), -1.0 / 6.0);
    return {lo, 1.0 / lo};
}

/// (x+1)^(2n+1) / (2 sqrt(pi n x)); for x > 1 evaluated through
/// M_n(x) = x^(2n) M_n(1/x). Outside the window this is an error, not an
/// extrapolation.
inline SignedLogValue mn_asymptotic(int n, double x)
{
    if (n < 1) throw std::invalid_argument("mn_asymptotic: n must be positive");
    const auto [lo, hi] = asymptotic_window(n);
    if (!(x >= lo && x <= hi))
        throw std::domain_error("mn_asymptotic: x = " + std::to_string(x) + " outside (n^-1/6, n^1/6)");
    if (x > 1.0) return mn_asymptotic(n, 1.0 / x).scaled(2.0 * n * std::log(x));
    const double log_value =
        (2.0 * n + 1.0) * std::log1p(x) - std::log(2.0 * std::sqrt(std::numbers::pi * n * x));
    return SignedLogValue::from_log(log_value);
}

/// i_x = floor(n x / (x + 1)): the index of the dominant term of M_n(x) for x in (0, 1].
struct LemmaIndex {
    int n;
    double x;
    int i_x;

    static LemmaIndex make(int n, double x)
    {
        if (n < 1 || !(x > 0.0 && x <= 1.0)) throw std::invalid_argument("LemmaIndex: need n >= 1, x in (0,1]");
        return {n, x, static_cast<int>(std::floor(n * x / (x + 1.0)))};
    }
};

struct KernelBounds {
    SignedLogValue lower;
    SignedLogValue upper;
};

/// C(n,i_x)^2 x^(2 i_x) <= M_n(x) <= 3 i_x^(3/4) C(n,i_x)^2 x^(2 i_x),
/// valid for x in [log(n)/(6n), 1].
inline KernelBounds mn_lemma_i_bounds(int n, double x)
{
    if (n < 2) throw std::invalid_argument("mn_lemma_i_bounds: n must be at least 2");
    const double lo = std::log(static_cast<double>(n)) / (6.0 * n);
    if (!(x >= lo && x <= 1.0)) throw std::domain_error("mn_lemma_i_bounds: x outside [log(n)/(6n), 1]");
    const LemmaIndex idx = LemmaIndex::make(n, x);
    if (idx.i_x < 1) throw std::domain_error("mn_lemma_i_bounds: i_x = 0, n too small for this x");
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(idx.i_x + 1.0) - std::lgamma(n - idx.i_x + 1.0);
    const double log_lower = 2.0 * log_c + 2.0 * idx.i_x * std::log(x);
    const double log_upper = log_lower + std::log(3.0) + 0.75 * std::log(static_cast<double>(idx.i_x));
    return {SignedLogValue::from_log(log_lower), SignedLogValue::from_log(log_upper)};
}

/// Legendre polynomial L_n(z) for z >= 1 from the three-term recurrence
/// (k+1) L_{k+1} = (2k+1) z L_k - k L_{k-1}, renormalized every 64 steps.
inline SignedLogValue legendre_eval(int n, double z)
{
    if (n < 0) throw std::invalid_argument("legendre_eval: negative degree");
    if (!(z >= 1.0)) throw std::domain_error("legendre_eval: z must be >= 1");
    if (n == 0) return SignedLogValue::from_log(0.0);
    double prev = 1.0, cur = z, log_offset = 0.0;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0) * z * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
        if (k % 64 == 0) {
            const double scale = std::abs(cur);
            prev /= scale;
            cur /= scale;
            log_offset += std::log(scale);
        }
    }
    return SignedLogValue::from_log(log_offset + std::log(cur));
}

/// M_n(x) = (1 - x^2)^n L_n((1 + x^2)/(1 - x^2)) for 0 < x < 1.
inline SignedLogValue mn_via_legendre(int n, double x)
{
    if (n < 1) throw std::invalid_argument("mn_via_legendre: n must be positive");
    if (!(x > 0.0 && x < 1.0)) throw std::domain_error("mn_via_legendre: x must lie in (0, 1)");
    const double x2 = x * x;
    return legendre_eval(n, (1.0 + x2) / (1.0 - x2)).scaled(n * std::log1p(-x2));
}

/// Correlation of f_n(x) and f_n(y): M_n(sqrt(xy)) / sqrt(M_n(x) M_n(y)).
inline double autocorr_A(const LogBinomialTable& lb, double x, double y)
{
    if (!(x > 0.0 && y > 0.0)) throw std::invalid_argument("autocorr_A: x and y must be positive");
    if (x == y) return 1.0;
    const double log_a =
        mn_exact(lb, std::sqrt(x * y)).log_abs - 0.5 * (mn_exact(lb, x).log_abs + mn_exact(lb, y).log_abs);
    return std::min(1.0, std::exp(log_a));
}

inline double autocorr_A(int n, double x, double y) { return autocorr_A(LogBinomialTable(n), x, y); }

/// t = 2 sqrt(n) arctan(sqrt(x)).
inline double transform_t(double x, int n)
{
    if (!(x > 0.0) || n < 1) throw std::invalid_argument("transform_t: need x > 0, n >= 1");
    return 2.0 * std::sqrt(static_cast<double>(n)) * std::atan(std::sqrt(x));
}

/// x = tan^2(t / (2 sqrt n)) for t in (0, pi sqrt n).
inline double transform_x(double t, int n)
{
    if (n < 1) throw std::invalid_argument("transform_x: n must be positive");
    const double rn = std::sqrt(static_cast<double>(n));
    if (!(t > 0.0 && t < std::numbers::pi * rn)) throw std::domain_error("transform_x: t outside (0, pi sqrt n)");
    const double tn = std::tan(t / (2.0 * rn));
    return tn * tn;
}

/// A time coordinate in the transformed domain of f_n.
struct KernelPoint {
    double t;
    int n;

    static KernelPoint from_x(double x, int n) { return {transform_t(x, n), n}; }
    double x() const { return transform_x(t, n); }
};

/// alpha_n = 2 sqrt(n) arctan(n^-1/12): the t-image of x = n^-1/6.
inline double main_interval_offset(int n) { return transform_t(std::pow(static_cast<double>(n), -1.0 / 6.0), n); }

/// Length of the shifted main interval (0, pi sqrt n - 2 alpha_n).
inline double main_interval_length(int n)
{
    return std::numbers::pi * std::sqrt(static_cast<double>(n)) - 2.0 * main_interval_offset(n);
}

/// |A_n(x_u, x_v) - exp(-(u-v)^2/4)| with x_w = tan^2((w + alpha_n)/(2 sqrt n)).
inline double autocorr_B_limit_gap(const LogBinomialTable& lb, double u, double v)
{
    const int n = lb.n();
    const double length = main_interval_length(n);
    if (!(u >= 0.0 && u <= length && v >= 0.0 && v <= length))
        throw std::domain_error("autocorr_B_limit_gap: coordinates outside the main interval");
    if (u == v) return 0.0;
    const double alpha = main_interval_offset(n);
    const double a = autocorr_A(lb, transform_x(u + alpha, n), transform_x(v + alpha, n));
    return std::abs(a - std::exp(-(u - v) * (u - v) / 4.0));
}

inline double autocorr_B_limit_gap(int n, double u, double v)
{
    return autocorr_B_limit_gap(LogBinomialTable(n), u, v);
}

} // namespace persistlab
