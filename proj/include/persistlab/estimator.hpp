#pragma once

// Monte Carlo estimates of P(f_n > 0 on an interval) and the derived
// diagnostics: the ratio -log p_n / (pi sqrt n), the low/high interval
// report and the autocorrelation convergence table.

#include "persistlab/gpsim.hpp"
#include "persistlab/parallel.hpp"
#include "persistlab/polycore.hpp"
#include "persistlab/random.hpp"
#include "persistlab/screen.hpp"
#include "persistlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace persistlab {

struct PersistenceOptions {
    unsigned workers = 1;
    bool reversed = false; // sample the mirrored coefficient sequence
    double grid_step = 0.25;
    DecisionStats* stats = nullptr;
};

inline StreamKey polynomial_stream(std::uint64_t seed, std::string_view domain, IntervalKind kind, int n,
                                   std::uint64_t sample, bool reversed)
{
    return {seed, hash_label(domain) ^ (static_cast<std::uint64_t>(kind) << 1) ^ (reversed ? 1u : 0u),
            static_cast<std::uint64_t>(n), sample, 0};
}

namespace detail {

inline PersistenceEstimate run_persistence(const PositivityDecider& decider, std::uint64_t samples,
                                           std::uint64_t seed, std::string_view domain,
                                           const PersistenceOptions& opt)
{
    const unsigned workers = std::max(1u, opt.workers);
    std::vector<std::uint64_t> hits(workers, 0);
    std::vector<DecisionStats> stats(workers);
    parallel_blocks(samples, workers, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
        std::uint64_t local = 0;
        for (std::uint64_t s = begin; s < end; ++s) {
            LazyCoefficients a(decider.n,
                               RngStream(polynomial_stream(seed, domain, decider.kind, decider.n, s, opt.reversed)),
                               opt.reversed);
            local += decider.decide(a, &stats[w]) ? 1 : 0;
        }
        hits[w] = local;
    });
    std::uint64_t total = 0;
    for (unsigned w = 0; w < workers; ++w) {
        total += hits[w];
        if (opt.stats) {
            opt.stats->screened_out += stats[w].screened_out;
            opt.stats->certified += stats[w].certified;
            opt.stats->exact += stats[w].exact;
        }
    }
    return PersistenceEstimate::from_counts(total, samples);
}

} // namespace detail

/// p_hat of strict positivity of f_n on the interval, from `samples`
/// independent polynomials. Each sample has its own stream, so the result is
/// the same for every worker count.
inline PersistenceEstimate estimate_persistence(int n, IntervalKind kind, std::uint64_t samples, std::uint64_t seed,
                                                const PersistenceOptions& opt = {})
{
    if (n < 0) throw std::invalid_argument("estimate_persistence: negative degree");
    if (samples < 1000) throw std::invalid_argument("estimate_persistence: need at least 1000 samples");
    const PositivityDecider decider(n, kind, opt.grid_step);
    return detail::run_persistence(decider, samples, seed, "persist", opt);
}

struct BudgetPlan {
    std::uint64_t pilot_samples = 0;
    std::uint64_t pilot_successes = 0;
    std::uint64_t samples = 0;
    bool capped = false;
};

/// ceil(target / p_rough) from a pilot of 10^3 samples. A pilot with no
/// successes is grown tenfold (on fresh streams) until it sees one or would
/// exceed the cap.
inline BudgetPlan plan_budget(int n, IntervalKind kind, std::uint64_t seed, std::uint64_t cap,
                              const PersistenceOptions& opt = {}, double target_successes = 100.0)
{
    const PositivityDecider decider(n, kind, opt.grid_step);
    BudgetPlan plan;
    std::uint64_t pilot = 1000;
    for (int round = 0;; ++round) {
        const auto e = detail::run_persistence(decider, pilot, seed + 0x9e37u * (round + 1), "pilot", opt);
        plan.pilot_samples = pilot;
        plan.pilot_successes = e.successes;
        if (e.successes > 0) break;
        if (pilot * 10 > cap) {
            plan.samples = cap;
            plan.capped = true;
            return plan;
        }
        pilot *= 10;
    }
    const double p_rough = static_cast<double>(plan.pilot_successes) / static_cast<double>(plan.pilot_samples);
    const double want = std::ceil(target_successes / p_rough);
    plan.samples = static_cast<std::uint64_t>(std::clamp(want, 1000.0, static_cast<double>(cap)));
    plan.capped = want > static_cast<double>(cap);
    return plan;
}

inline constexpr std::uint64_t kRatioSuccessFloor = 10;

struct RatioPoint {
    int n = 0;
    PersistenceEstimate estimate;
    double ratio = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;

    double half_width() const { return 0.5 * (ci_high - ci_low); }
};

/// -log p / (pi sqrt n) with a delta-method 95% interval.
inline RatioPoint make_ratio_point(int n, const PersistenceEstimate& e, double level = 0.95)
{
    if (e.successes < kRatioSuccessFloor)
        throw std::domain_error("make_ratio_point: fewer than 10 successes at n = " + std::to_string(n));
    RatioPoint r;
    r.n = n;
    r.estimate = e;
    const double scale = std::numbers::pi * std::sqrt(static_cast<double>(n));
    r.ratio = -std::log(e.p_hat) / scale;
    const double half = two_sided_z(level) * e.log_stderr() / scale;
    r.ci_low = r.ratio - half;
    r.ci_high = r.ratio + half;
    return r;
}

struct RatioSequence {
    std::vector<RatioPoint> points;
    std::vector<std::pair<int, PersistenceEstimate>> dropped; // undersampled n
    std::vector<BudgetPlan> budgets;
};

/// Ratio points for increasing n. `samples == 0` selects the auto-scaled
/// budget (capped at `cap`); otherwise every n uses `samples`.
inline RatioSequence ratio_sequence(const std::vector<int>& ns, std::uint64_t samples, std::uint64_t seed,
                                    const PersistenceOptions& opt = {}, std::uint64_t cap = 20'000'000)
{
    for (std::size_t i = 1; i < ns.size(); ++i)
        if (ns[i] <= ns[i - 1]) throw std::invalid_argument("ratio_sequence: n values must increase");
    RatioSequence out;
    for (int n : ns) {
        BudgetPlan plan;
        plan.samples = samples;
        if (samples == 0) plan = plan_budget(n, IntervalKind::full, seed, cap, opt);
        out.budgets.push_back(plan);
        const auto e = estimate_persistence(n, IntervalKind::full, plan.samples, seed, opt);
        if (e.successes < kRatioSuccessFloor)
            out.dropped.emplace_back(n, e);
        else
            out.points.push_back(make_ratio_point(n, e));
    }
    return out;
}

/// Each successive ratio moves closer to the target, where "closer" is
/// judged with the interval of the newer point: the step counts when
/// |r_k - b| minus the 95% half-width of r_k is below |r_{k-1} - b|.
inline bool ratios_approach(const std::vector<RatioPoint>& pts, double target)
{
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const double prev = std::abs(pts[k - 1].ratio - target);
        const double cur = std::abs(pts[k].ratio - target);
        if (!(cur - pts[k].half_width() < prev)) return false;
    }
    return true;
}

struct NegligibleRow {
    int n = 0;
    IntervalKind kind = IntervalKind::low;
    PersistenceEstimate estimate;
    double score = 0.0; // -log p_hat / sqrt n; +inf when p_hat = 0
    double score_bound = 0.0; // the same with the Wilson upper p: a floor on the true score
    bool symmetric_with_partner = false;
};

/// Low and high interval estimates per n, scored by -log p / sqrt n, plus the
/// in-law symmetry check between the two.
inline std::vector<NegligibleRow> negligible_interval_report(const std::vector<int>& ns, std::uint64_t samples,
                                                             std::uint64_t seed, const PersistenceOptions& opt = {})
{
    std::vector<NegligibleRow> rows;
    for (int n : ns) {
        NegligibleRow low, high;
        for (auto* row : {&low, &high}) {
            row->n = n;
            row->kind = row == &low ? IntervalKind::low : IntervalKind::high;
            row->estimate = estimate_persistence(n, row->kind, samples, seed, opt);
            const double rn = std::sqrt(static_cast<double>(n));
            row->score = row->estimate.successes > 0 ? -std::log(row->estimate.p_hat) / rn
                                                     : std::numeric_limits<double>::infinity();
            row->score_bound = -std::log(row->estimate.ci_high) / rn;
        }
        const bool sym = agree_within_combined_ci(low.estimate, high.estimate);
        low.symmetric_with_partner = high.symmetric_with_partner = sym;
        rows.push_back(low);
        rows.push_back(high);
    }
    return rows;
}

struct B1Row {
    int n = 0;
    double lag = 0.0;
    double sup_gap = 0.0;
    double worst_u = 0.0;
};

/// For each n and lag, sup over a uniform grid of base points u in the main
/// interval of |A_n - exp(-lag^2/4)| after the t-transform.
inline std::vector<B1Row> b1_convergence_report(const std::vector<int>& ns, const std::vector<double>& lags,
                                                int base_points = 64)
{
    std::vector<B1Row> rows;
    for (int n : ns) {
        const LogBinomialTable lb(n);
        const double length = main_interval_length(n);
        const double max_lag = lags.empty() ? 0.0 : *std::max_element(lags.begin(), lags.end());
        if (!(max_lag < length)) throw std::domain_error("b1_convergence_report: lag exceeds main interval at n = " + std::to_string(n));
        for (double lag : lags) {
            B1Row r;
            r.n = n;
            r.lag = lag;
            const double span = length - lag;
            for (int k = 0; k < base_points; ++k) {
                const double u = base_points == 1 ? 0.0 : span * k / (base_points - 1);
                const double gap = autocorr_B_limit_gap(lb, u, std::min(u + lag, length));
                if (gap > r.sup_gap) {
                    r.sup_gap = gap;
                    r.worst_u = u;
                }
            }
            rows.push_back(r);
        }
    }
    return rows;
}

} // namespace persistlab
