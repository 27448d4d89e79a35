#include "persistlab/screen.hpp"

#include "oracles/quadratic_oracle.hpp"
#include "oracles/root_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace persistlab;

namespace {

std::vector<double> normals(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> normal;
    std::vector<double> a(n + 1);
    for (auto& v : a) v = normal(rng);
    return a;
}

// Minimum of the Bernstein sum over a uniform y-grid of (lo, hi), long double.
long double grid_min(const std::vector<double>& a, double lo, double hi, int m = 20000)
{
    long double best = std::numeric_limits<long double>::infinity();
    const int n = static_cast<int>(a.size()) - 1;
    for (int k = 1; k < m; ++k) {
        const long double y = lo + (hi - lo) * static_cast<long double>(k) / m;
        const long double r = y / (1.0L - y);
        long double w = std::pow(1.0L - y, static_cast<long double>(n)), s = 0;
        for (int i = 0; i <= n; ++i) {
            s += a[i] * w;
            w *= r * (n - i) / (i + 1);
        }
        best = std::min(best, s);
    }
    return best;
}

} // namespace

TEST(Intervals, ParseAndName)
{
    for (auto k : {IntervalKind::full, IntervalKind::low, IntervalKind::high, IntervalKind::main})
        EXPECT_EQ(parse_interval(interval_name(k)), k);
    EXPECT_THROW(parse_interval("middle"), std::invalid_argument);
}

TEST(Intervals, CutsAreMirrorImagesAndExact)
{
    for (int n : {2, 10, 100, 1000, 10000, 1000000}) {
        const double yc = low_cut_y(n);
        const double c = std::pow(n, -1.0 / 6.0);
        EXPECT_NEAR(yc, c / (1 + c), 1e-15);
        const auto lo = y_interval(IntervalKind::low, n);
        const auto hi = y_interval(IntervalKind::high, n);
        const auto mid = y_interval(IntervalKind::main, n);
        EXPECT_EQ(lo.lo, 0.0);
        EXPECT_EQ(hi.hi, 1.0);
        EXPECT_EQ(1.0 - hi.lo, lo.hi);
        EXPECT_EQ(mid.lo, lo.hi);
        EXPECT_EQ(mid.hi, hi.lo);
        // x-images: y/(1-y) at the cuts is n^-1/6 and n^1/6.
        EXPECT_NEAR(lo.hi / (1 - lo.hi), c, 1e-13);
        EXPECT_NEAR(hi.lo / (1 - hi.lo), 1 / c, 1e-12 / c);
    }
}

TEST(Intervals, TransformToT)
{
    const int n = 400;
    // y = sin^2(t / (2 sqrt n))
    for (double t : {0.5, 3.0, 20.0, 60.0}) {
        const double s = std::sin(t / (2 * std::sqrt(n)));
        EXPECT_NEAR(y_to_t(s * s, n), t, 1e-11);
    }
    EXPECT_NEAR(y_to_t(1.0, n), std::numbers::pi * std::sqrt(n), 1e-12);
}

TEST(ScreenGrid, WeightsMatchDirectBernsteinWeights)
{
    const int n = 300;
    const ScreenGrid grid(n, {0.0, 1.0});
    ASSERT_FALSE(grid.points().empty());
    for (const auto& p : grid.points()) {
        EXPECT_GT(p.y, 0.0);
        EXPECT_LT(p.y, 1.0);
        long double mass = 0;
        for (int i = p.lo; i <= p.hi; ++i) {
            const long double w = oracle::binom(n, i) * std::pow(static_cast<long double>(p.y), i) *
                                  std::pow(1.0L - p.y, static_cast<long double>(n - i));
            EXPECT_NEAR(p.w[i - p.lo], static_cast<double>(w), 1e-12 * static_cast<double>(w) + 1e-300);
            mass += p.w[i - p.lo];
        }
        EXPECT_NEAR(static_cast<double>(mass), 1.0, 1e-11);
    }
}

TEST(ScreenGrid, PointsOrderedByDrawCost)
{
    const ScreenGrid grid(200, {0.0, 1.0});
    for (std::size_t k = 1; k < grid.points().size(); ++k)
        EXPECT_LE(grid.points()[k - 1].draws_needed, grid.points()[k].draws_needed);
}

TEST(ScreenGrid, EvaluateBoundCoversTruth)
{
    std::mt19937_64 rng(31);
    const int n = 120;
    const ScreenGrid grid(n, {0.0, 1.0});
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = normals(rng, n);
        for (const auto& p : grid.points()) {
            long double truth = 0;
            for (int i = 0; i <= n; ++i)
                truth += a[i] * oracle::binom(n, i) * std::pow(static_cast<long double>(p.y), i) *
                         std::pow(1.0L - p.y, static_cast<long double>(n - i));
            const auto [v, err] = ScreenGrid::evaluate(p, a);
            EXPECT_LE(std::abs(static_cast<long double>(v) - truth), err + 1e-18);
        }
    }
}

TEST(Screen, NeverRejectsAPositivePolynomial)
{
    // Screening is a certified-negative test: it must leave every
    // persistent polynomial undecided.
    const int n = 12;
    const PositivityDecider decider(n, IntervalKind::full);
    int persistent = 0;
    for (std::uint64_t s = 0; s < 20000 && persistent < 60; ++s) {
        LazyCoefficients a(n, RngStream(StreamKey{4, 1, 2, s, 0}));
        LazyCoefficients b(n, RngStream(StreamKey{4, 1, 2, s, 0}));
        const bool exact = is_persistent(b.materialize());
        if (exact) {
            ++persistent;
            EXPECT_EQ(screen(decider.grid, decider.iv, a), Verdict::undecided);
        }
    }
    EXPECT_GE(persistent, 30);
}

TEST(Screen, LazyDrawsMatchFullSample)
{
    const int n = 50;
    for (std::uint64_t s = 0; s < 50; ++s) {
        LazyCoefficients a(n, RngStream(StreamKey{9, 9, 9, s, 0}));
        const PositivityDecider d(n, IntervalKind::full);
        (void)screen(d.grid, d.iv, a);
        a.ensure_all();
        RngStream full(StreamKey{9, 9, 9, s, 0});
        const auto ref = sample_polynomial(n, full);
        for (int i = 0; i <= n; ++i) EXPECT_EQ(a[i], ref[i]);
    }
}

TEST(BernsteinCertificate, KnownPolynomials)
{
    // (1 - 2y)^2 + 0.01 has Bernstein coefficients 1.01, -0.99, 1.01.
    const std::vector<double> pos{1.01, -0.99, 1.01};
    EXPECT_EQ(bernstein_certificate(pos, 0.0, 1.0), Verdict::positive);
    const std::vector<double> neg{1.0, -1.01, 1.0};
    EXPECT_EQ(bernstein_certificate(neg, 0.0, 1.0), Verdict::not_positive);
    EXPECT_EQ(bernstein_certificate(neg, 0.0, 0.25), Verdict::positive);
    EXPECT_EQ(bernstein_certificate(neg, 0.75, 1.0), Verdict::positive);
    EXPECT_THROW(bernstein_certificate(neg, 0.1, 0.7), std::invalid_argument); // 0.1/0.7 not exact
    EXPECT_THROW(bernstein_certificate(neg, 0.5, 0.5), std::invalid_argument);
    // A double root inside: cannot be certified either way.
    const std::vector<double> tangent{1.0, -1.0, 1.0};
    EXPECT_EQ(bernstein_certificate(tangent, 0.0, 1.0, {20, 2000}), Verdict::undecided);
}

TEST(BernsteinCertificate, AgreesWithQuadraticOracle)
{
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 5000; ++trial) {
        // degree 2 Bernstein b0, b1, b2 = f coefficients with C(2,i): a0 + 2 a1 x + a2 x^2 in x = y/(1-y).
        const double a0 = normal(rng), a1 = normal(rng), a2 = normal(rng);
        const std::vector<double> b{a0, a1, a2};
        const Verdict v = bernstein_certificate(b, 0.0, 1.0);
        const bool truth = oracle::quadratic_positive(a0, a1, a2);
        if (v == Verdict::positive) {
            EXPECT_TRUE(truth) << a0 << " " << a1 << " " << a2;
            EXPECT_GT(a0, 0.0);
            EXPECT_GT(a2, 0.0);
        }
        if (v == Verdict::not_positive) {
            // Closed [0,1]: a negative end value or an interior dip.
            EXPECT_TRUE(!truth || a0 < 0 || a2 < 0);
        }
    }
}

TEST(BernsteinToPower, MatchesDirectExpansion)
{
    std::mt19937_64 rng(12);
    for (int n : {0, 1, 3, 7}) {
        const auto a = normals(rng, n);
        const auto p = bernstein_to_power(a);
        for (double y : {0.0, 0.2, 0.5, 0.9}) {
            long double direct = 0;
            for (int i = 0; i <= n; ++i)
                direct += a[i] * oracle::binom(n, i) * std::pow(static_cast<long double>(y), i) *
                          std::pow(1.0L - y, static_cast<long double>(n - i));
            EXPECT_NEAR(p.approx_at(y), static_cast<double>(direct), 1e-12);
        }
    }
}

TEST(ExactPositiveOn, OpenIntervalSemantics)
{
    // Power form y - 1/2 on (0, 1/2): positive? No, negative throughout.
    const std::vector<mpz_class> lin{-1, 2};
    const DyadicPolynomial p(lin);
    EXPECT_FALSE(exact_positive_on(p, 0.0, 0.5));
    EXPECT_TRUE(exact_positive_on(p, 0.5, 1.0)); // root at the open left end
    EXPECT_FALSE(exact_positive_on(p, 0.25, 0.75));
    // (2y - 1)^2 is zero at 1/2: positive on (0, 1/2), not on (0, 1).
    const DyadicPolynomial sq(std::vector<mpz_class>{1, -4, 4});
    EXPECT_TRUE(exact_positive_on(sq, 0.0, 0.5));
    EXPECT_FALSE(exact_positive_on(sq, 0.0, 1.0));
}

TEST(PositivityDecider, FullAxisMatchesSturm)
{
    for (int n : {1, 2, 5, 9, 16}) {
        const PositivityDecider d(n, IntervalKind::full);
        for (std::uint64_t s = 0; s < 2000; ++s) {
            LazyCoefficients a(n, RngStream(StreamKey{1, 2, 3, s, 0}));
            LazyCoefficients b(n, RngStream(StreamKey{1, 2, 3, s, 0}));
            ASSERT_EQ(d.decide(a), is_persistent(b.materialize())) << "n=" << n << " s=" << s;
        }
    }
}

TEST(PositivityDecider, RestrictedIntervalsMatchExactAndGridOracle)
{
    std::mt19937_64 rng(99);
    for (int n : {8, 20, 40}) {
        for (auto kind : {IntervalKind::low, IntervalKind::high, IntervalKind::main}) {
            const PositivityDecider d(n, kind);
            int disagreements_with_grid = 0;
            for (std::uint64_t s = 0; s < 200; ++s) {
                LazyCoefficients a(n, RngStream(StreamKey{5, static_cast<std::uint64_t>(kind), 7, s, 0}));
                LazyCoefficients b(n, RngStream(StreamKey{5, static_cast<std::uint64_t>(kind), 7, s, 0}));
                b.ensure_all();
                const bool got = d.decide(a);
                const bool exact = exact_positive_on(bernstein_to_power(b.values()), d.iv.lo, d.iv.hi);
                ASSERT_EQ(got, exact) << "n=" << n << " kind=" << interval_name(kind) << " s=" << s;
                const bool grid = grid_min(b.values(), d.iv.lo, d.iv.hi, 4000) > 0;
                disagreements_with_grid += grid != exact;
            }
            // A grid misses only very narrow dips.
            EXPECT_LE(disagreements_with_grid, 4);
        }
    }
}

TEST(PositivityDecider, LowAndHighAreMirrorImages)
{
    // Reversal maps y to 1 - y, so deciding reversed coefficients on the
    // low interval is deciding the originals on the high one.
    const int n = 40;
    const PositivityDecider low(n, IntervalKind::low), high(n, IntervalKind::high);
    for (std::uint64_t s = 0; s < 300; ++s) {
        LazyCoefficients a(n, RngStream(StreamKey{8, 8, 8, s, 0}));
        a.ensure_all();
        const std::vector<double> fwd = a.values();
        const std::vector<double> rev(fwd.rbegin(), fwd.rend());
        EXPECT_EQ(exact_positive_on(bernstein_to_power(fwd), high.iv.lo, high.iv.hi),
                  exact_positive_on(bernstein_to_power(rev), low.iv.lo, low.iv.hi));
        LazyCoefficients lf(n, RngStream(StreamKey{8, 8, 8, s, 0}), true);
        LazyCoefficients hf(n, RngStream(StreamKey{8, 8, 8, s, 0}));
        // Reversed draw order on [0, y_c] sees exactly the reversed sample.
        lf.ensure_all();
        for (int i = 0; i <= n; ++i) ASSERT_EQ(lf[i], fwd[n - i]);
        LazyCoefficients lf2(n, RngStream(StreamKey{8, 8, 8, s, 0}), true);
        EXPECT_EQ(low.decide(lf2), high.decide(hf));
    }
}

TEST(PositivityDecider, StatsCountEveryDecision)
{
    const int n = 30;
    const PositivityDecider d(n, IntervalKind::main);
    DecisionStats st;
    for (std::uint64_t s = 0; s < 500; ++s) {
        LazyCoefficients a(n, RngStream(StreamKey{2, 2, 2, s, 0}));
        (void)d.decide(a, &st);
    }
    EXPECT_EQ(st.screened_out + st.certified + st.exact, 500u);
    EXPECT_GT(st.screened_out, 0u);
}
