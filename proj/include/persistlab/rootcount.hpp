#pragma once

// Exact positive-root counting for f_n via Sturm chains over the integers.
//
// A double is a dyadic rational, so C(n,i) * a_i is represented exactly as an
// integer numerator over a common power of two. The chain is built with the
// subresultant recurrences (exact divisions keep coefficient growth linear)
// and each element is sign-corrected to be a positive multiple of the
// classical negated Euclidean remainder, which is all Sturm's theorem needs.

#include "persistlab/polycore.hpp"

#include <gmpxx.h>

#include <cmath>
#include <limits>
#include <algorithm>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace persistlab {

/// num * 2^exp.
struct Dyadic {
    mpz_class num = 0;
    long exp = 0;

    static Dyadic from_double(double v)
    {
        if (!std::isfinite(v)) throw std::invalid_argument("Dyadic: non-finite value");
        if (v == 0.0) return {};
        int e = 0;
        const double frac = std::frexp(v, &e);
        // frac * 2^53 is an integer with |.| < 2^53.
        const auto mant = static_cast<long long>(std::ldexp(frac, 53));
        Dyadic d{mpz_class(static_cast<long>(mant)), static_cast<long>(e) - 53};
        d.normalize();
        return d;
    }

    void normalize()
    {
        if (num == 0) {
            exp = 0;
            return;
        }
        const auto tz = mpz_scan1(num.get_mpz_t(), 0);
        if (tz > 0) {
            mpz_fdiv_q_2exp(num.get_mpz_t(), num.get_mpz_t(), tz);
            exp += static_cast<long>(tz);
        }
    }

    int sign() const { return sgn(num); }

    double to_double() const
    {
        long e = 0;
        const double d = mpz_get_d_2exp(&e, num.get_mpz_t());
        return std::ldexp(d, static_cast<int>(e + exp));
    }

    /// (a + b) / 2, exact.
    static Dyadic midpoint(const Dyadic& a, const Dyadic& b)
    {
        const long e = std::min(a.exp, b.exp);
        mpz_class na = a.num, nb = b.num;
        mpz_mul_2exp(na.get_mpz_t(), na.get_mpz_t(), a.exp - e);
        mpz_mul_2exp(nb.get_mpz_t(), nb.get_mpz_t(), b.exp - e);
        Dyadic m{na + nb, e - 1};
        m.normalize();
        return m;
    }
};

/// A polynomial with dyadic-rational coefficients, stored as integer
/// numerators over a common 2^exponent. Leading zeros are stripped, so the
/// zero polynomial has degree -1.
class DyadicPolynomial {
public:
    DyadicPolynomial() = default;

    DyadicPolynomial(std::vector<mpz_class> numerators, long exponent = 0)
        : num_(std::move(numerators)), exponent_(exponent)
    {
        trim();
    }

    static DyadicPolynomial from_doubles(std::span<const double> coefficients)
    {
        std::vector<Dyadic> d;
        d.reserve(coefficients.size());
        for (double c : coefficients) d.push_back(Dyadic::from_double(c));
        return from_dyadics(d);
    }

    /// Exact image of sum_i C(n,i) a_i x^i.
    static DyadicPolynomial from_binomial(const BinomialPolynomial& p)
    {
        const int n = p.degree();
        std::vector<Dyadic> d;
        d.reserve(n + 1);
        mpz_class binom;
        for (int i = 0; i <= n; ++i) {
            Dyadic c = Dyadic::from_double(p[i]);
            mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(i));
            c.num *= binom;
            d.push_back(std::move(c));
        }
        return from_dyadics(d);
    }

    int degree() const { return static_cast<int>(num_.size()) - 1; }
    bool is_zero() const { return num_.empty(); }
    long exponent() const { return exponent_; }
    const std::vector<mpz_class>& numerators() const { return num_; }
    const mpz_class& leading() const { return num_.back(); }

    int leading_sign() const { return is_zero() ? 0 : sgn(num_.back()); }

    /// Sign of the lowest nonzero coefficient: the sign of p on (0, eps).
    int sign_near_zero() const
    {
        for (const auto& c : num_)
            if (c != 0) return sgn(c);
        return 0;
    }

    int sign_at_zero() const { return is_zero() ? 0 : sgn(num_.front()); }

    /// Sign as x -> +inf (positive = true) or -inf.
    int sign_at_infinity(bool positive) const
    {
        const int s = leading_sign();
        return (positive || degree() % 2 == 0) ? s : -s;
    }

    /// Exact sign of p(point).
    int sign_at(const Dyadic& point) const
    {
        if (is_zero()) return 0;
        if (point.num == 0) return sign_at_zero();
        const int d = degree();
        mpz_class acc = num_[d];
        if (point.exp >= 0) {
            mpz_class q = point.num;
            mpz_mul_2exp(q.get_mpz_t(), q.get_mpz_t(), static_cast<mp_bitcnt_t>(point.exp));
            for (int i = d - 1; i >= 0; --i) {
                acc *= q;
                acc += num_[i];
            }
            return sgn(acc);
        }
        // Homogenize: 2^(k d) p(q / 2^k) = sum_i c_i q^i 2^(k (d - i)).
        const auto k = static_cast<mp_bitcnt_t>(-point.exp);
        mpz_class term;
        for (int i = d - 1; i >= 0; --i) {
            acc *= point.num;
            mpz_mul_2exp(term.get_mpz_t(), num_[i].get_mpz_t(), k * static_cast<mp_bitcnt_t>(d - i));
            acc += term;
        }
        return sgn(acc);
    }

    int sign_at(double x) const { return sign_at(Dyadic::from_double(x)); }

    DyadicPolynomial derivative() const
    {
        if (degree() <= 0) return {};
        std::vector<mpz_class> d(num_.size() - 1);
        for (std::size_t i = 1; i < num_.size(); ++i) d[i - 1] = num_[i] * static_cast<unsigned long>(i);
        return {std::move(d), exponent_};
    }

    /// The same polynomial scaled to coprime integer coefficients with a
    /// positive leading coefficient when `keep_sign` is false.
    DyadicPolynomial primitive(bool keep_sign = true) const
    {
        if (is_zero()) return {};
        mpz_class g = 0;
        for (const auto& c : num_) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
        if (!keep_sign && leading_sign() < 0) g = -g;
        std::vector<mpz_class> out(num_.size());
        for (std::size_t i = 0; i < num_.size(); ++i) mpz_divexact(out[i].get_mpz_t(), num_[i].get_mpz_t(), g.get_mpz_t());
        return {std::move(out), 0};
    }

    /// Approximate value, for diagnostics only.
    double approx_at(double x) const
    {
        double acc = 0.0;
        for (int i = degree(); i >= 0; --i) acc = acc * x + num_[i].get_d();
        return std::ldexp(acc, static_cast<int>(exponent_));
    }

    bool operator==(const DyadicPolynomial&) const = default;

private:
    static DyadicPolynomial from_dyadics(std::vector<Dyadic>& d)
    {
        long e = std::numeric_limits<long>::max();
        for (const auto& c : d)
            if (c.num != 0) e = std::min(e, c.exp);
        if (e == std::numeric_limits<long>::max()) return {};
        std::vector<mpz_class> num(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i].num == 0) continue;
            mpz_mul_2exp(num[i].get_mpz_t(), d[i].num.get_mpz_t(), static_cast<mp_bitcnt_t>(d[i].exp - e));
        }
        return {std::move(num), e};
    }

    void trim()
    {
        while (!num_.empty() && num_.back() == 0) num_.pop_back();
        if (num_.empty()) exponent_ = 0;
    }

    std::vector<mpz_class> num_;
    long exponent_ = 0;
};

namespace detail {

/// lc(b)^(deg a - deg b + 1) * a mod b, computed in place on integer numerators.
inline std::vector<mpz_class> pseudo_remainder(std::vector<mpz_class> r, const std::vector<mpz_class>& b)
{
    const int db = static_cast<int>(b.size()) - 1;
    int e = static_cast<int>(r.size()) - 1 - db + 1;
    const mpz_class& lb = b.back();
    while (static_cast<int>(r.size()) - 1 >= db && !r.empty()) {
        const int dr = static_cast<int>(r.size()) - 1;
        const mpz_class lead = r.back();
        const int shift = dr - db;
        for (int i = 0; i < dr; ++i) r[i] *= lb;
        for (int j = 0; j < db; ++j) mpz_submul(r[j + shift].get_mpz_t(), lead.get_mpz_t(), b[j].get_mpz_t());
        r.pop_back();
        while (!r.empty() && r.back() == 0) r.pop_back();
        --e;
    }
    if (e > 0 && !r.empty()) {
        mpz_class f;
        mpz_pow_ui(f.get_mpz_t(), lb.get_mpz_t(), static_cast<unsigned long>(e));
        for (auto& c : r) c *= f;
    }
    return r;
}

} // namespace detail

/// p, p', then negated remainders down to a constant or to gcd(p, p').
/// Every element is a positive multiple of the classical Sturm polynomial.
class SturmChain {
public:
    const std::vector<DyadicPolynomial>& polynomials() const { return chain_; }
    std::size_t size() const { return chain_.size(); }
    const DyadicPolynomial& operator[](std::size_t i) const { return chain_[i]; }

    /// Last element; constant iff p is squarefree.
    const DyadicPolynomial& gcd() const { return chain_.back(); }
    bool squarefree() const { return chain_.back().degree() == 0; }

    template <typename SignFn>
    int variations(SignFn&& sign_of) const
    {
        int count = 0, last = 0;
        for (const auto& p : chain_) {
            const int s = sign_of(p);
            if (s == 0) continue;
            if (last != 0 && s != last) ++count;
            last = s;
        }
        return count;
    }

    int variations_near_zero() const
    {
        return variations([](const DyadicPolynomial& p) { return p.sign_near_zero(); });
    }
    int variations_at_infinity(bool positive = true) const
    {
        return variations([positive](const DyadicPolynomial& p) { return p.sign_at_infinity(positive); });
    }
    int variations_at(const Dyadic& x) const
    {
        return variations([&x](const DyadicPolynomial& p) { return p.sign_at(x); });
    }

private:
    friend SturmChain build_chain(const DyadicPolynomial& p);
    std::vector<DyadicPolynomial> chain_;
};

inline SturmChain build_chain(const DyadicPolynomial& p)
{
    if (p.is_zero()) throw std::invalid_argument("build_chain: zero polynomial");
    SturmChain out;
    // The common 2^exponent is a positive factor, irrelevant to signs.
    DyadicPolynomial a(p.numerators());
    out.chain_.push_back(a);
    if (a.degree() == 0) return out;
    DyadicPolynomial b = a.derivative();
    out.chain_.push_back(b);

    mpz_class g = 1, h = 1, divisor, tmp;
    while (b.degree() > 0) {
        const int delta = a.degree() - b.degree();
        std::vector<mpz_class> r = detail::pseudo_remainder(a.numerators(), b.numerators());
        if (r.empty()) break; // b is gcd(p, p')

        // prem = lc(b)^(delta+1) rem; negate and undo the sign of that factor.
        const bool flip = !(b.leading_sign() < 0 && (delta + 1) % 2 == 1);
        mpz_pow_ui(tmp.get_mpz_t(), h.get_mpz_t(), static_cast<unsigned long>(delta));
        divisor = g * tmp;
        for (auto& c : r) {
            mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), divisor.get_mpz_t());
            if (flip) c = -c;
        }
        a = std::move(b);
        b = DyadicPolynomial(std::move(r));
        out.chain_.push_back(b);

        g = abs(a.leading());
        if (delta == 1) {
            h = g;
        } else if (delta > 1) {
            mpz_pow_ui(tmp.get_mpz_t(), g.get_mpz_t(), static_cast<unsigned long>(delta));
            mpz_class hp;
            mpz_pow_ui(hp.get_mpz_t(), h.get_mpz_t(), static_cast<unsigned long>(delta - 1));
            mpz_divexact(h.get_mpz_t(), tmp.get_mpz_t(), hp.get_mpz_t());
        }
    }
    return out;
}

/// p / gcd(p, p') as a primitive integer polynomial with positive leading
/// coefficient. Its roots are the distinct roots of p.
inline DyadicPolynomial squarefree_part(const DyadicPolynomial& p, const SturmChain& chain)
{
    if (chain.squarefree()) return DyadicPolynomial(p.numerators()).primitive(false);
    const auto& g = chain.gcd().numerators();
    // lc(g)^k p = q g exactly; q is recovered by pseudo-division.
    std::vector<mpz_class> r = p.numerators();
    const int dg = static_cast<int>(g.size()) - 1;
    std::vector<mpz_class> q(r.size() - dg);
    const mpz_class& lg = g.back();
    for (int dr = static_cast<int>(r.size()) - 1; dr >= dg; --dr) {
        const mpz_class lead = r[dr];
        const int shift = dr - dg;
        for (auto& c : q) c *= lg;
        q[shift] += lead;
        for (int i = 0; i < dr; ++i) r[i] *= lg;
        for (int j = 0; j < dg; ++j) mpz_submul(r[j + shift].get_mpz_t(), lead.get_mpz_t(), g[j].get_mpz_t());
        r[dr] = 0;
    }
    return DyadicPolynomial(std::move(q)).primitive(false);
}

struct RootCountResult {
    int count = 0;                    // distinct roots in (0, inf)
    bool persistent_positive = false; // p > 0 on all of (0, inf)
};

namespace detail {

// V(lo) with lo = 0 read as 0+, so that a root at the origin is excluded.
inline int variations_from(const SturmChain& chain, const Dyadic& lo)
{
    return lo.num == 0 ? chain.variations_near_zero() : chain.variations_at(lo);
}

} // namespace detail

/// Distinct roots in (a, b] for dyadic 0 <= a < b; a = 0 means (0, b].
inline int count_roots_between(const SturmChain& chain, const Dyadic& a, const Dyadic& b)
{
    return detail::variations_from(chain, a) - chain.variations_at(b);
}

/// Distinct roots in (-inf, 0].
inline int count_nonpositive_roots(const DyadicPolynomial& p)
{
    const SturmChain chain = build_chain(p);
    const SturmChain sq = build_chain(squarefree_part(p, chain));
    return sq.variations_at_infinity(false) - sq.variations_at(Dyadic{});
}

/// V(0+) - V(inf) on the chain of the squarefree part. A repeated root is
/// counted once and still rules out strict positivity.
inline RootCountResult count_positive_roots(const DyadicPolynomial& p, const SturmChain& chain)
{
    RootCountResult out;
    if (chain.squarefree()) {
        out.count = chain.variations_near_zero() - chain.variations_at_infinity(true);
    } else {
        const SturmChain sq = build_chain(squarefree_part(p, chain));
        out.count = sq.variations_near_zero() - sq.variations_at_infinity(true);
    }
    out.persistent_positive = out.count == 0 && p.sign_at(Dyadic{1, 0}) > 0;
    return out;
}

inline RootCountResult count_positive_roots(const DyadicPolynomial& p)
{
    return count_positive_roots(p, build_chain(p));
}

/// Exact decision of f_n(x) > 0 for every x in (0, inf).
inline bool is_persistent(const BinomialPolynomial& p)
{
    return count_positive_roots(DyadicPolynomial::from_binomial(p)).persistent_positive;
}

/// Disjoint dyadic intervals (lo, hi], each holding exactly one distinct
/// positive root, in increasing order.
inline std::vector<std::pair<Dyadic, Dyadic>> isolate_positive_roots(const DyadicPolynomial& p)
{
    std::vector<std::pair<Dyadic, Dyadic>> out;
    const DyadicPolynomial sq = squarefree_part(p, build_chain(p));
    if (sq.degree() < 1) return out;
    const SturmChain chain = build_chain(sq);

    // Cauchy bound: every root is below 1 + max|c_i| / |c_d| <= 2^k.
    std::size_t max_bits = 0;
    for (const auto& c : sq.numerators()) max_bits = std::max(max_bits, mpz_sizeinbase(c.get_mpz_t(), 2));
    const auto lead_bits = mpz_sizeinbase(sq.leading().get_mpz_t(), 2);
    const long k = std::max(1L, static_cast<long>(max_bits) - static_cast<long>(lead_bits) + 2);

    struct Pending {
        Dyadic lo, hi;
        int count;
    };
    Pending whole{Dyadic{}, Dyadic{1, k}, 0};
    whole.count = count_roots_between(chain, whole.lo, whole.hi);
    std::vector<Pending> stack{whole};
    while (!stack.empty()) {
        Pending cur = std::move(stack.back());
        stack.pop_back();
        if (cur.count == 0) continue;
        if (cur.count == 1) {
            out.emplace_back(cur.lo, cur.hi);
            continue;
        }
        Dyadic mid = Dyadic::midpoint(cur.lo, cur.hi);
        const int left = count_roots_between(chain, cur.lo, mid);
        stack.push_back({mid, cur.hi, cur.count - left});
        stack.push_back({cur.lo, std::move(mid), left});
    }
    // The stack pops left halves first, so `out` is already increasing.
    return out;
}

/// Positive roots of p, bisected on Sturm-isolated intervals until the
/// width is at most rel_tol * max(1, x).
inline std::vector<double> locate_positive_roots(const DyadicPolynomial& p, double rel_tol = 1e-12)
{
    std::vector<double> roots;
    const auto intervals = isolate_positive_roots(p);
    if (intervals.empty()) return roots;
    const SturmChain chain = build_chain(squarefree_part(p, build_chain(p)));
    for (auto [lo, hi] : intervals) {
        for (int iter = 0; iter < 4096; ++iter) {
            const double l = lo.to_double(), h = hi.to_double();
            if (h - l <= rel_tol * std::max(1.0, h)) break;
            Dyadic mid = Dyadic::midpoint(lo, hi);
            if (count_roots_between(chain, lo, mid) == 1)
                hi = std::move(mid);
            else
                lo = std::move(mid);
        }
        roots.push_back(Dyadic::midpoint(lo, hi).to_double());
    }
    return roots;
}

} // namespace persistlab
