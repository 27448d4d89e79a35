#pragma once

// Deciding whether one sampled f_n stays positive on a y-interval, where
// y = x / (1 + x) = sin^2(t / (2 sqrt n)). In y the normalized polynomial is
// a Bernstein sum, g_n(x) = sum_i a_i C(n,i) y^i (1-y)^(n-i), so the raw
// coefficients a_i are already its Bernstein coefficients on [0, 1].
//
// Decisions are made in three tiers, each of which only ever returns an
// answer it can prove:
//   1. a floating scan on a t-grid that rejects on a sign it can certify,
//   2. a Bernstein subdivision certificate with a rounding-error budget,
//   3. an exact Sturm count in y.

#include "persistlab/polycore.hpp"
#include "persistlab/rootcount.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <numeric>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace persistlab {

enum class IntervalKind { full, low, high, main };

inline const char* interval_name(IntervalKind k)
{
    switch (k) {
    case IntervalKind::full: return "full";
    case IntervalKind::low: return "low";
    case IntervalKind::high: return "high";
    case IntervalKind::main: return "main";
    }
    return "?";
}

inline IntervalKind parse_interval(const std::string& s)
{
    if (s == "full") return IntervalKind::full;
    if (s == "low") return IntervalKind::low;
    if (s == "high") return IntervalKind::high;
    if (s == "main") return IntervalKind::main;
    throw std::invalid_argument("unknown interval '" + s + "' (expected full, low, high or main)");
}

/// y-image of the cut point x = n^-1/6, rounded to a multiple of 2^-53 so
/// that the mirrored cut 1 - y_c is also an exact double.
inline double low_cut_y(int n)
{
    const double c = std::pow(static_cast<double>(n), -1.0 / 6.0);
    return std::ldexp(std::round(std::ldexp(c / (1.0 + c), 53)), -53);
}

/// Open y-interval of an IntervalSpec. The x-endpoints n^-1/6 and n^1/6 map
/// to y_c and 1 - y_c, so the low and high intervals are exact mirror images
/// under y -> 1 - y, which is coefficient reversal.
struct YInterval {
    double lo;
    double hi;
};

inline YInterval y_interval(IntervalKind kind, int n)
{
    if (kind == IntervalKind::full || n < 2) return {0.0, 1.0};
    const double yc = low_cut_y(n);
    switch (kind) {
    case IntervalKind::low: return {0.0, yc};
    case IntervalKind::high: return {1.0 - yc, 1.0};
    default: return {yc, 1.0 - yc};
    }
}

inline double y_to_t(double y, int n)
{
    return 2.0 * std::sqrt(static_cast<double>(n)) * std::asin(std::sqrt(y));
}

namespace detail {

// Bernstein weights below exp(-kWeightCut) times the largest one are dropped
// and charged to the error budget instead.
inline constexpr double kWeightCut = 50.0;
// The polar method returns v sqrt(-2 ln r / r) with |v| <= sqrt(r), and
// r >= 2^-106 for 53-bit uniforms, so every draw has |N| < 12.2.
inline constexpr double kNormalBound = 16.0;
// Relative error of a stored weight plus the windowed dot product.
inline constexpr double kWeightRelErr = 1e-12;

} // namespace detail

/// Precomputed Bernstein weights at the t-grid points of one interval.
/// Shared read-only by every sample at this n.
class ScreenGrid {
public:
    struct Point {
        double y;
        int lo, hi;             // nonzero weight window [lo, hi]
        double tail;            // bound on the dropped weight mass
        std::vector<double> w;  // C(n,i) y^i (1-y)^(n-i) for i in [lo, hi]
        int draws_needed;       // cheapest lazy prefix/suffix covering the window
        bool from_low;
    };

    ScreenGrid(int n, YInterval iv, double step = 0.25) : n_(n)
    {
        if (!(step > 0.0)) throw std::invalid_argument("ScreenGrid: step must be positive");
        if (n < 1) return;
        const LogBinomialTable lb(n);
        const double t_lo = y_to_t(iv.lo, n), t_hi = y_to_t(iv.hi, n);
        const double rn = std::sqrt(static_cast<double>(n));
        std::vector<double> ys;
        for (long j = static_cast<long>(std::floor(t_lo / step)) + 1; step * j < t_hi; ++j) {
            const double s = std::sin(step * j / (2.0 * rn));
            ys.push_back(s * s);
        }
        // Closed-end samples at interior cuts: a negative value at the cut
        // forces negatives just inside the open interval.
        if (iv.lo > 0.0) ys.push_back(iv.lo);
        if (iv.hi < 1.0) ys.push_back(iv.hi);
        for (double y : ys)
            if (y > 0.0 && y < 1.0) points_.push_back(make_point(lb, y));
        std::stable_sort(points_.begin(), points_.end(),
                         [](const Point& a, const Point& b) { return a.draws_needed < b.draws_needed; });
    }

    int degree() const { return n_; }
    const std::vector<Point>& points() const { return points_; }

    /// g at point p from coefficients that cover p's window, with a
    /// certified bound on the absolute error.
    static std::pair<double, double> evaluate(const Point& p, std::span<const double> a)
    {
        double sum = 0.0, mag = 0.0;
        for (int i = p.lo; i <= p.hi; ++i) {
            const double term = p.w[i - p.lo] * a[i];
            sum += term;
            mag += std::abs(term);
        }
        return {sum, detail::kWeightRelErr * mag + detail::kNormalBound * p.tail};
    }

private:
    Point make_point(const LogBinomialTable& lb, double y) const
    {
        const long double ly = std::log(static_cast<long double>(y));
        const long double l1y = std::log1p(-static_cast<long double>(y));
        auto logw = [&](int i) { return lb.extended(i) + i * ly + (n_ - i) * l1y; };
        int mode = std::clamp(static_cast<int>(std::lround(n_ * y)), 0, n_);
        while (mode < n_ && logw(mode + 1) > logw(mode)) ++mode;
        while (mode > 0 && logw(mode - 1) > logw(mode)) --mode;
        const long double top = logw(mode);
        int lo = mode, hi = mode;
        while (lo > 0 && logw(lo - 1) - top > -detail::kWeightCut) --lo;
        while (hi < n_ && logw(hi + 1) - top > -detail::kWeightCut) ++hi;
        Point p;
        p.y = y;
        p.lo = lo;
        p.hi = hi;
        // Log-concave weights: each dropped term is below the cut, and there
        // are at most n+1 of them.
        p.tail = (lo > 0 || hi < n_) ? (n_ + 1) * std::exp(static_cast<double>(top) - detail::kWeightCut) : 0.0;
        p.w.resize(hi - lo + 1);
        for (int i = lo; i <= hi; ++i) p.w[i - lo] = static_cast<double>(std::exp(logw(i)));
        const int need_low = hi + 1, need_high = n_ - lo + 1;
        p.from_low = need_low <= need_high;
        // Alternating draws: the k-th prefix element arrives with draw 2k-1,
        // the k-th suffix element with draw 2k.
        p.draws_needed = p.from_low ? 2 * need_low - 1 : 2 * need_high;
        return p;
    }

    int n_;
    std::vector<Point> points_;
};

enum class Verdict { positive, not_positive, undecided };

/// Tier 1. Returns not_positive only when some grid value is negative
/// beyond its error bound (or an endpoint limit a_0, a_n is negative);
/// otherwise `undecided`. Coefficients are drawn lazily in the order the
/// grid needs them.
inline Verdict screen(const ScreenGrid& grid, YInterval iv, LazyCoefficients& a)
{
    const int n = grid.degree();
    if (iv.lo == 0.0) {
        a.ensure_index(0);
        if (a[0] < 0.0) return Verdict::not_positive;
    }
    if (iv.hi == 1.0) {
        a.ensure_index(n);
        if (a[n] < 0.0) return Verdict::not_positive;
    }
    for (const auto& p : grid.points()) {
        if (p.from_low)
            a.ensure_ends(p.hi + 1, 0);
        else
            a.ensure_ends(0, n - p.lo + 1);
        const auto [value, err] = ScreenGrid::evaluate(p, a.values());
        if (value < -err) return Verdict::not_positive;
    }
    return Verdict::undecided;
}

namespace detail {

using Ld = long double;

// One de Casteljau pass at parameter r: `left` receives the Bernstein
// coefficients on [0, r], `b` is overwritten with those on [r, 1].
inline void de_casteljau_split(std::vector<Ld>& b, std::vector<Ld>& left, Ld r)
{
    const std::size_t m = b.size();
    left.resize(m);
    const Ld s = 1.0L - r;
    left[0] = b[0];
    for (std::size_t level = 1; level < m; ++level) {
        for (std::size_t i = 0; i + level < m; ++i) b[i] = s * b[i] + r * b[i + 1];
        left[level] = b[0];
    }
}

inline Ld max_abs(const std::vector<Ld>& b)
{
    Ld m = 0;
    for (Ld v : b) m = std::max(m, std::abs(v));
    return m;
}

// Worst-case rounding added by one pass: each level is a convex combination
// (two products and a sum, <= 3u of the running max), n levels deep.
inline Ld pass_error(std::size_t m, Ld max_coef)
{
    return 4.0L * static_cast<Ld>(m) * LDBL_EPSILON * max_coef;
}

} // namespace detail

struct CertificateLimits {
    int max_depth = 48;
    int max_pieces = 20000;
};

/// Tier 2. Bernstein coefficients `a` on [0, 1]; decides positivity of the
/// polynomial on the closed piece [lo, hi] where lo / hi must be exactly
/// representable (so the restriction is to exactly that piece). A piece whose
/// coefficients all exceed the accumulated error is certified positive; a
/// piece endpoint value below minus the error is a certified negative.
inline Verdict bernstein_certificate(std::span<const double> a, double lo, double hi, CertificateLimits lim = {})
{
    using detail::Ld;
    if (!(0.0 <= lo && lo < hi && hi <= 1.0)) throw std::invalid_argument("bernstein_certificate: need 0 <= lo < hi <= 1");
    const Ld ratio = static_cast<Ld>(lo) / static_cast<Ld>(hi);
    // fma rounds ratio * hi - lo once, so zero means the product is exact.
    if (std::fma(ratio, static_cast<Ld>(hi), -static_cast<Ld>(lo)) != 0.0L)
        throw std::invalid_argument("bernstein_certificate: lo/hi not exact");

    std::vector<Ld> b(a.begin(), a.end()), left;
    const std::size_t m = b.size();
    Ld err = 0;
    if (hi < 1.0) {
        err += detail::pass_error(m, detail::max_abs(b));
        detail::de_casteljau_split(b, left, hi);
        b.swap(left);
    }
    if (lo > 0.0) {
        err += detail::pass_error(m, detail::max_abs(b));
        detail::de_casteljau_split(b, left, ratio);
    }

    struct Piece {
        std::vector<Ld> b;
        Ld err;
        int depth;
    };
    std::vector<Piece> stack;
    stack.push_back({std::move(b), err, 0});
    int pieces = 0;
    bool undecided = false;
    while (!stack.empty()) {
        Piece cur = std::move(stack.back());
        stack.pop_back();
        if (cur.b.front() < -cur.err || cur.b.back() < -cur.err) return Verdict::not_positive;
        if (*std::min_element(cur.b.begin(), cur.b.end()) > cur.err) continue;
        if (cur.depth >= lim.max_depth || ++pieces > lim.max_pieces) {
            undecided = true;
            continue;
        }
        const Ld e = cur.err + detail::pass_error(m, detail::max_abs(cur.b));
        detail::de_casteljau_split(cur.b, left, 0.5L);
        stack.push_back({std::move(cur.b), e, cur.depth + 1});
        stack.push_back({left, e, cur.depth + 1});
    }
    return undecided ? Verdict::undecided : Verdict::positive;
}

/// Exact power-basis image of sum_i a_i C(n,i) y^i (1-y)^(n-i).
inline DyadicPolynomial bernstein_to_power(std::span<const double> a)
{
    const int n = static_cast<int>(a.size()) - 1;
    std::vector<Dyadic> d;
    d.reserve(a.size());
    for (double v : a) d.push_back(Dyadic::from_double(v));
    long e = 0;
    bool any = false;
    for (const auto& c : d)
        if (c.num != 0) {
            e = any ? std::min(e, c.exp) : c.exp;
            any = true;
        }
    if (!any) return {};
    std::vector<mpz_class> num(a.size()), coef(a.size());
    for (int i = 0; i <= n; ++i)
        if (d[i].num != 0) mpz_mul_2exp(num[i].get_mpz_t(), d[i].num.get_mpz_t(), static_cast<mp_bitcnt_t>(d[i].exp - e));
    mpz_class bn, bk, term;
    for (int i = 0; i <= n; ++i) {
        if (num[i] == 0) continue;
        mpz_bin_uiui(bn.get_mpz_t(), n, i);
        for (int k = 0; k <= n - i; ++k) {
            mpz_bin_uiui(bk.get_mpz_t(), n - i, k);
            term = num[i] * bn * bk;
            if (k % 2) coef[i + k] -= term;
            else coef[i + k] += term;
        }
    }
    return {std::move(coef), e};
}

/// Tier 3. Exact decision of positivity on the open y-interval (lo, hi).
inline bool exact_positive_on(const DyadicPolynomial& p, double lo, double hi)
{
    if (p.is_zero()) return false;
    const SturmChain chain = build_chain(p);
    const SturmChain sq = chain.squarefree() ? chain : build_chain(squarefree_part(p, chain));
    const Dyadic dl = Dyadic::from_double(lo), dh = Dyadic::from_double(hi);
    // Roots in (lo, hi]; a root sitting exactly at hi is outside (lo, hi).
    int roots = count_roots_between(sq, dl, dh);
    if (p.sign_at(dh) == 0) --roots;
    if (roots > 0) return false;
    return p.sign_at(Dyadic::midpoint(dl, dh)) > 0;
}

struct DecisionStats {
    std::uint64_t screened_out = 0;
    std::uint64_t certified = 0;
    std::uint64_t exact = 0;
};

/// Positivity of one lazily sampled polynomial on an interval. Full-axis
/// survivors of the scan go to the exact Sturm decision when n is at most
/// `sturm_max_degree`, otherwise through the certificate first. Restricted
/// intervals always try the certificate first.
struct PositivityDecider {
    int n;
    IntervalKind kind;
    YInterval iv;
    ScreenGrid grid;
    int sturm_max_degree = 512;

    PositivityDecider(int n_, IntervalKind k, double step = 0.25)
        : n(n_), kind(k), iv(y_interval(k, n_)), grid(n_, iv, step)
    {
    }

    bool decide(LazyCoefficients& a, DecisionStats* stats = nullptr) const
    {
        if (n == 0) {
            a.ensure_all();
            return a[0] > 0.0;
        }
        if (screen(grid, iv, a) == Verdict::not_positive) {
            if (stats) ++stats->screened_out;
            return false;
        }
        a.ensure_all();
        const std::span<const double> coef(a.values());
        if (kind == IntervalKind::full && n <= sturm_max_degree) {
            if (stats) ++stats->exact;
            return is_persistent(BinomialPolynomial(a.values()));
        }
        const Verdict v = certify(coef);
        if (v != Verdict::undecided) {
            if (stats) ++stats->certified;
            return v == Verdict::positive;
        }
        if (stats) ++stats->exact;
        return exact_positive_on(bernstein_to_power(coef), iv.lo, iv.hi);
    }

    Verdict certify(std::span<const double> coef) const
    {
        if (kind != IntervalKind::main) return bernstein_certificate(coef, iv.lo, iv.hi);
        // [y_c, 1 - y_c] as [y_c, 1/2] plus the mirror of [y_c, 1/2], so every
        // restriction parameter is exact.
        const Verdict left = bernstein_certificate(coef, iv.lo, 0.5);
        if (left == Verdict::not_positive) return left;
        std::vector<double> rev(coef.rbegin(), coef.rend());
        const Verdict right = bernstein_certificate(rev, iv.lo, 0.5);
        if (right == Verdict::not_positive) return right;
        return (left == Verdict::positive && right == Verdict::positive) ? Verdict::positive : Verdict::undecided;
    }
};

} // namespace persistlab
