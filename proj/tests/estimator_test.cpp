#include "persistlab/estimator.hpp"

#include <gtest/gtest.h>

using namespace persistlab;

namespace {

// P(a0 > 0, a2 > 0, a1 > -sqrt(a0 a2)) for i.i.d. standard normals: the
// n = 2 persistence probability, by midpoint quadrature over (a0, a2).
double quadratic_persistence_oracle()
{
    const double h = 0.004, top = 9.0;
    const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    double sum = 0.0;
    for (double u = h / 2; u < top; u += h) {
        const double fu = phi0 * std::exp(-u * u / 2);
        for (double v = h / 2; v < top; v += h) {
            const double fv = phi0 * std::exp(-v * v / 2);
            sum += fu * fv * 0.5 * std::erfc(-std::sqrt(u * v) / std::numbers::sqrt2);
        }
    }
    return sum * h * h;
}

PersistenceEstimate synthetic(double p, std::uint64_t samples)
{
    PersistenceEstimate e;
    e.samples = samples;
    e.p_hat = p;
    e.successes = static_cast<std::uint64_t>(std::llround(p * static_cast<double>(samples)));
    return e;
}

RatioPoint point(double ratio, double half)
{
    RatioPoint r;
    r.ratio = ratio;
    r.ci_low = ratio - half;
    r.ci_high = ratio + half;
    return r;
}

} // namespace

TEST(Wilson, Examples)
{
    auto [lo, hi] = wilson_ci(0, 100);
    EXPECT_EQ(lo, 0.0);
    EXPECT_GT(hi, 0.0);
    std::tie(lo, hi) = wilson_ci(100, 100);
    EXPECT_EQ(hi, 1.0);
    std::tie(lo, hi) = wilson_ci(50, 100);
    EXPECT_NEAR(0.5 * (lo + hi), 0.5, 1e-15);
    // Closed form at p = 1/2: width = 2 z sqrt(1/4/n + z^2/4/n^2) / (1 + z^2/n).
    const double z = 1.959963984540054;
    const double width = 2 * z * std::sqrt(0.25 / 100 + z * z / 40000) / (1 + z * z / 100);
    EXPECT_NEAR(hi - lo, width, 1e-12);
    EXPECT_NEAR(hi - lo, 0.19, 0.005);
    EXPECT_THROW(wilson_ci(5, 4), std::invalid_argument);
    EXPECT_THROW(two_sided_z(1.0), std::invalid_argument);
}

TEST(Wilson, CombinedAgreement)
{
    const auto a = PersistenceEstimate::from_counts(500, 1000);
    const auto b = PersistenceEstimate::from_counts(540, 1000);
    const auto c = PersistenceEstimate::from_counts(600, 1000);
    EXPECT_TRUE(agree_within_combined_ci(a, b));
    EXPECT_FALSE(agree_within_combined_ci(a, c));
    EXPECT_FALSE(PersistenceEstimate::from_counts(0, 1000).usable_for_log());
    EXPECT_TRUE(std::isinf(PersistenceEstimate::from_counts(0, 1000).log_stderr()));
}

TEST(EstimatePersistence, DegreeZeroAndOne)
{
    const auto e0 = estimate_persistence(0, IntervalKind::full, 100000, 7);
    EXPECT_NEAR(e0.p_hat, 0.5, 3 * e0.half_width());
    const auto e1 = estimate_persistence(1, IntervalKind::full, 100000, 7);
    EXPECT_NEAR(e1.p_hat, 0.25, 3 * e1.half_width());
    EXPECT_LE(e1.ci_low, 0.25);
    EXPECT_GE(e1.ci_high, 0.25);
}

TEST(EstimatePersistence, DegreeTwoMatchesQuadratureOracle)
{
    const double want = quadratic_persistence_oracle();
    EXPECT_GT(want, 0.25 * 0.5);
    EXPECT_LT(want, 0.25);
    const auto e = estimate_persistence(2, IntervalKind::full, 200000, 13);
    EXPECT_LE(e.ci_low, want);
    EXPECT_GE(e.ci_high, want);
}

TEST(EstimatePersistence, ReproducibleAndPartitionIndependent)
{
    const auto a = estimate_persistence(10, IntervalKind::full, 5000, 99, {.workers = 1});
    const auto b = estimate_persistence(10, IntervalKind::full, 5000, 99, {.workers = 1});
    const auto c = estimate_persistence(10, IntervalKind::full, 5000, 99, {.workers = 3});
    EXPECT_EQ(a.successes, b.successes);
    EXPECT_EQ(a.successes, c.successes);
    const auto d = estimate_persistence(10, IntervalKind::full, 5000, 100);
    EXPECT_NE(a.successes, d.successes);
}

TEST(EstimatePersistence, ReversalInvarianceInLaw)
{
    const auto fwd = estimate_persistence(9, IntervalKind::full, 100000, 3);
    const auto rev = estimate_persistence(9, IntervalKind::full, 100000, 3, {.reversed = true});
    EXPECT_NE(fwd.successes, rev.successes); // different draws...
    EXPECT_TRUE(agree_within_combined_ci(fwd, rev)); // ...same law
}

TEST(EstimatePersistence, LowIntervalBoundedByEndpointSign)
{
    // Positivity near 0 forces a_0 >= 0.
    const auto e = estimate_persistence(100, IntervalKind::low, 20000, 5);
    EXPECT_LE(e.p_hat, 0.5 + e.half_width());
    EXPECT_GT(e.p_hat, 0.0);
}

TEST(EstimatePersistence, StatsAccountForEverySample)
{
    DecisionStats st;
    (void)estimate_persistence(30, IntervalKind::full, 3000, 1, {.workers = 2, .stats = &st});
    EXPECT_EQ(st.screened_out + st.certified + st.exact, 3000u);
    EXPECT_THROW(estimate_persistence(5, IntervalKind::full, 999, 1), std::invalid_argument);
}

TEST(Ratio, SyntheticInversionIsExact)
{
    for (int n : {16, 36, 64, 100, 144}) {
        const double p = std::exp(-0.1 * std::numbers::pi * std::sqrt(n));
        const auto r = make_ratio_point(n, synthetic(p, 100'000'000));
        EXPECT_NEAR(r.ratio, 0.1, 1e-14);
        EXPECT_LT(r.ci_low, r.ratio);
        EXPECT_GT(r.ci_high, r.ratio);
    }
}

TEST(Ratio, WidthHalvesWhenSamplesQuadruple)
{
    const auto a = make_ratio_point(64, synthetic(0.01, 100000));
    const auto b = make_ratio_point(64, synthetic(0.01, 400000));
    EXPECT_NEAR(b.half_width() / a.half_width(), 0.5, 1e-12);
}

TEST(Ratio, SuccessFloor)
{
    EXPECT_THROW(make_ratio_point(16, PersistenceEstimate::from_counts(9, 1000)), std::domain_error);
    EXPECT_NO_THROW(make_ratio_point(16, PersistenceEstimate::from_counts(10, 1000)));
    const auto seq = ratio_sequence({1, 144}, 1000, 2);
    ASSERT_EQ(seq.points.size(), 1u);
    EXPECT_EQ(seq.points[0].n, 1);
    ASSERT_EQ(seq.dropped.size(), 1u);
    EXPECT_EQ(seq.dropped[0].first, 144);
    EXPECT_THROW(ratio_sequence({4, 4}, 1000, 2), std::invalid_argument);
}

TEST(Ratio, ApproachRuleUsesNewerInterval)
{
    const double b = 0.3;
    EXPECT_TRUE(ratios_approach({point(0.5, 0.01), point(0.4, 0.01), point(0.32, 0.01)}, b));
    EXPECT_FALSE(ratios_approach({point(0.5, 0.01), point(0.6, 0.01)}, b));
    // Not closer as a point estimate, but within its own interval of closer.
    EXPECT_TRUE(ratios_approach({point(0.4, 0.01), point(0.405, 0.02)}, b));
    EXPECT_FALSE(ratios_approach({point(0.4, 0.01), point(0.405, 0.004)}, b));
    EXPECT_TRUE(ratios_approach({point(0.4, 0.01)}, b));
}

TEST(Budget, PilotRules)
{
    auto plan = plan_budget(1, IntervalKind::full, 3, 20'000'000);
    EXPECT_EQ(plan.pilot_samples, 1000u);
    EXPECT_GT(plan.pilot_successes, 150u);
    EXPECT_EQ(plan.samples, 1000u); // ceil(100 / 0.25) clamps up to the floor
    EXPECT_FALSE(plan.capped);
    plan = plan_budget(16, IntervalKind::full, 3, 20'000'000);
    const double p = static_cast<double>(plan.pilot_successes) / static_cast<double>(plan.pilot_samples);
    EXPECT_EQ(plan.samples, static_cast<std::uint64_t>(std::ceil(100.0 / p)));
    plan = plan_budget(400, IntervalKind::full, 3, 5000);
    EXPECT_TRUE(plan.capped);
    EXPECT_EQ(plan.samples, 5000u);
}

TEST(Negligible, ReportShape)
{
    const auto rows = negligible_interval_report({100}, 20000, 4);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].kind, IntervalKind::low);
    EXPECT_EQ(rows[1].kind, IntervalKind::high);
    EXPECT_EQ(rows[0].symmetric_with_partner, rows[1].symmetric_with_partner);
    for (const auto& r : rows) {
        EXPECT_TRUE(std::isfinite(r.score));
        EXPECT_LE(r.score_bound, r.score);
        EXPECT_NEAR(r.score, -std::log(r.estimate.p_hat) / 10.0, 1e-15);
    }
}

TEST(B1Report, ZeroLagAndDecrease)
{
    const auto rows = b1_convergence_report({1000, 10000}, {0.0, 1.0}, 16);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_LT(rows[0].sup_gap, 1e-12);
    EXPECT_LT(rows[2].sup_gap, 1e-12);
    EXPECT_GT(rows[1].sup_gap, rows[3].sup_gap);
    EXPECT_THROW(b1_convergence_report({16}, {100.0}), std::domain_error);
}
