#pragma once

// Batch commands. `execute` turns a RunConfig into a result Table (no I/O);
// `run` renders it and writes the output and plot files.

#include "persistlab/estimator.hpp"
#include "persistlab/game.hpp"
#include "persistlab/gpsim.hpp"
#include "persistlab/polycore.hpp"
#include "persistlab/report.hpp"
#include "persistlab/screen.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace persistlab {

inline constexpr const char* kVersion = "0.3.0";

/// Bad flag values or combinations; reported with exit status 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string command;
    std::optional<int> n;
    std::vector<int> n_list;
    std::optional<std::uint64_t> samples;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::optional<double> delta;
    std::vector<double> horizons;
    IntervalKind interval = IntervalKind::full;
    double scale = std::numbers::sqrt2;
    std::string sampler = "series";
    std::vector<double> lags;
    std::string format = "csv";
    bool plot = false;
    std::string out;
};

inline const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"mn-check", "persist", "ratio",   "gp-exponent",
                                                "negligible", "game",  "b1-report"};
    return names;
}

namespace detail {

template <typename T>
std::string join(const std::vector<T>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

inline Cell num(double v) { return v; }
inline Cell count(std::uint64_t v) { return static_cast<std::int64_t>(v); }

inline std::vector<int> ns_or(const RunConfig& c, std::vector<int> fallback)
{
    if (c.n && !c.n_list.empty()) throw UsageError("--n and --n-list are mutually exclusive");
    if (c.n) return {*c.n};
    if (!c.n_list.empty()) return c.n_list;
    return fallback;
}

inline std::vector<double> default_horizons()
{
    std::vector<double> h;
    for (int T = 3; T <= 12; ++T) h.push_back(T);
    return h;
}

inline std::vector<double> default_lags()
{
    std::vector<double> l;
    for (int k = 1; k <= 12; ++k) l.push_back(0.25 * k);
    return l;
}

inline void base_config(Table& t, const RunConfig& c)
{
    t.config = {{"command", c.command}, {"seed", std::to_string(c.seed)}, {"workers", std::to_string(c.workers)},
                {"version", kVersion}};
}

inline void estimate_columns(Table& t)
{
    for (const char* name : {"successes", "samples"}) t.columns.push_back({name, "count"});
    for (const char* name : {"p_hat", "ci_low", "ci_high"}) t.columns.push_back({name, "probability"});
}

inline void push_estimate(std::vector<Cell>& row, const PersistenceEstimate& e)
{
    row.push_back(count(e.successes));
    row.push_back(count(e.samples));
    row.push_back(num(e.p_hat));
    row.push_back(num(e.ci_low));
    row.push_back(num(e.ci_high));
}

inline Table mn_check(const RunConfig& c)
{
    Table t;
    t.title = "mn-check";
    base_config(t, c);
    const auto ns = ns_or(c, {25});
    t.config.push_back({"n", join(ns)});
    t.columns = {{"n", "1"},
                 {"x", "1"},
                 {"log_exact", "log"},
                 {"log_legendre", "log"},
                 {"log_asymptotic", "log"},
                 {"rel_err_legendre", "1"},
                 {"rel_err_asymptotic", "1"},
                 {"log_lemma_lower", "log"},
                 {"log_lemma_upper", "log"},
                 {"sandwich", "bool"}};
    const std::vector<double> xs{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0};
    for (int n : ns) {
        if (n < 1) throw UsageError("mn-check: n must be positive");
        const LogBinomialTable lb(n);
        const auto [wlo, whi] = asymptotic_window(n);
        for (double x : xs) {
            const SignedLogValue exact = mn_exact(lb, x);
            std::vector<Cell> row{static_cast<std::int64_t>(n), num(x), num(exact.log_abs)};
            if (x < 1.0) {
                const auto leg = mn_via_legendre(n, x);
                row.push_back(num(leg.log_abs));
            } else {
                row.emplace_back();
            }
            const bool in_window = x >= wlo && x <= whi;
            if (in_window)
                row.push_back(num(mn_asymptotic(n, x).log_abs));
            else
                row.emplace_back();
            row.push_back(x < 1.0 ? num(relative_difference(mn_via_legendre(n, x), exact)) : Cell{});
            row.push_back(in_window ? num(relative_difference(mn_asymptotic(n, x), exact)) : Cell{});
            const bool lemma_range = n >= 2 && x <= 1.0 && x >= std::log(static_cast<double>(n)) / (6.0 * n) &&
                                     LemmaIndex::make(n, x).i_x >= 1;
            if (lemma_range) {
                const auto b = mn_lemma_i_bounds(n, x);
                row.push_back(num(b.lower.log_abs));
                row.push_back(num(b.upper.log_abs));
                row.push_back(b.lower.log_abs <= exact.log_abs && exact.log_abs <= b.upper.log_abs);
            } else {
                row.emplace_back();
                row.emplace_back();
                row.emplace_back();
            }
            t.add_row(std::move(row));
        }
    }
    return t;
}

inline Table persist(const RunConfig& c)
{
    Table t;
    t.title = "persist";
    base_config(t, c);
    const auto ns = ns_or(c, {});
    if (ns.empty()) throw UsageError("persist: --n or --n-list is required");
    const std::uint64_t samples = c.samples.value_or(100000);
    t.config.push_back({"n", join(ns)});
    t.config.push_back({"samples", std::to_string(samples)});
    t.config.push_back({"interval", interval_name(c.interval)});
    t.columns = {{"n", "1"}, {"interval", "1"}};
    estimate_columns(t);
    t.columns.push_back({"ratio", "1"});
    for (const char* name : {"screened_out", "certified", "exact_checks"}) t.columns.push_back({name, "count"});
    for (int n : ns) {
        DecisionStats stats;
        PersistenceOptions opt;
        opt.workers = c.workers;
        opt.stats = &stats;
        const auto e = estimate_persistence(n, c.interval, samples, c.seed, opt);
        std::vector<Cell> row{static_cast<std::int64_t>(n), std::string(interval_name(c.interval))};
        push_estimate(row, e);
        if (c.interval == IntervalKind::full && n >= 1 && e.successes >= kRatioSuccessFloor)
            row.push_back(num(make_ratio_point(n, e).ratio));
        else
            row.emplace_back();
        row.push_back(count(stats.screened_out));
        row.push_back(count(stats.certified));
        row.push_back(count(stats.exact));
        t.add_row(std::move(row));
    }
    return t;
}

inline SurvivalCurve gp_curve(const RunConfig& c, double scale, std::vector<double> horizons, std::uint64_t samples,
                              double step, bool require_fit)
{
    const GaussianKernel kernel(scale);
    const SamplerKind kind = c.sampler == "factor" ? SamplerKind::factor : SamplerKind::series;
    SurvivalCurve curve;
    curve.horizons = horizons;
    std::vector<FitPoint> pts;
    for (double T : horizons) {
        const auto e = estimate_survival(kernel, T, step, samples, c.seed, c.workers, kind);
        curve.estimates.push_back(e);
        if (e.usable_for_log()) pts.push_back({T, std::log(e.p_hat), e.log_stderr()});
    }
    try {
        curve.fit = fit_exponent(pts);
    } catch (const std::domain_error&) {
        if (require_fit) throw;
        curve.fit.slope = curve.fit.stderr = std::numeric_limits<double>::quiet_NaN();
    }
    return curve;
}

inline double gp_default_step(const RunConfig& c, double scale)
{
    // 0.25 resolves exp(-t^2/4); other kernels keep the same step per unit of
    // correlation length.
    return c.delta.value_or(0.25 * scale / std::numbers::sqrt2);
}

inline Table gp_exponent(const RunConfig& c)
{
    if (c.sampler != "series" && c.sampler != "factor") throw UsageError("--sampler must be series or factor");
    Table t;
    t.title = "gp-exponent";
    base_config(t, c);
    const auto horizons = c.horizons.empty() ? default_horizons() : c.horizons;
    const std::uint64_t samples = c.samples.value_or(200000);
    const double step = gp_default_step(c, c.scale);
    t.config.push_back({"horizons", join(horizons)});
    t.config.push_back({"samples", std::to_string(samples)});
    t.config.push_back({"delta", format_double(step)});
    t.config.push_back({"scale", format_double(c.scale)});
    t.config.push_back({"sampler", c.sampler});
    const auto curve = gp_curve(c, c.scale, horizons, samples, step, false);
    t.columns = {{"T", "time"}};
    estimate_columns(t);
    t.columns.push_back({"log_p", "log"});
    t.columns.push_back({"log_stderr", "log"});
    t.columns.push_back({"in_fit", "bool"});
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        const auto& e = curve.estimates[i];
        std::vector<Cell> row{num(horizons[i])};
        push_estimate(row, e);
        row.push_back(e.usable_for_log() ? num(std::log(e.p_hat)) : Cell{});
        row.push_back(e.usable_for_log() ? num(e.log_stderr()) : Cell{});
        bool used = false;
        for (const auto& p : curve.fit.points) used = used || p.horizon == horizons[i];
        row.push_back(used);
        t.add_row(std::move(row));
    }
    const bool have_fit = std::isfinite(curve.fit.slope);
    t.summary = {{"b_hat", have_fit ? num(curve.fit.slope) : Cell{}},
                 {"b_stderr", have_fit ? num(curve.fit.stderr) : Cell{}},
                 {"intercept", have_fit ? num(curve.fit.intercept) : Cell{}},
                 {"chi2", have_fit ? num(curve.fit.chi2) : Cell{}},
                 {"fit_points", static_cast<std::int64_t>(curve.fit.points.size())}};
    if (c.sampler == "series")
        t.summary.push_back({"truncation_K", static_cast<std::int64_t>(minimal_truncation(
                                                 GaussianKernel(c.scale), horizons.empty() ? 0.0 : *std::max_element(horizons.begin(), horizons.end())))});
    return t;
}

inline Table ratio(const RunConfig& c)
{
    Table t;
    t.title = "ratio";
    base_config(t, c);
    const auto ns = ns_or(c, {16, 36, 64, 100, 144});
    const std::uint64_t samples = c.samples.value_or(0);
    t.config.push_back({"n", join(ns)});
    t.config.push_back({"samples", samples == 0 ? std::string("auto") : std::to_string(samples)});
    PersistenceOptions opt;
    opt.workers = c.workers;
    const auto seq = ratio_sequence(ns, samples, c.seed, opt);

    // Comparison target from the process pipeline at its defaults.
    RunConfig gc = c;
    gc.sampler = "series";
    const double step = gp_default_step(gc, std::numbers::sqrt2);
    const auto curve = gp_curve(gc, std::numbers::sqrt2, default_horizons(), 200000, step, true);
    t.config.push_back({"gp_samples", "200000"});
    t.config.push_back({"gp_delta", format_double(step)});

    t.columns = {{"n", "1"}};
    estimate_columns(t);
    for (const char* name : {"ratio", "ratio_ci_low", "ratio_ci_high", "abs_gap_to_b"}) t.columns.push_back({name, "1"});
    t.columns.push_back({"status", "1"});
    std::size_t next = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        std::vector<Cell> row{static_cast<std::int64_t>(ns[i])};
        if (next < seq.points.size() && seq.points[next].n == ns[i]) {
            const auto& p = seq.points[next++];
            push_estimate(row, p.estimate);
            row.push_back(num(p.ratio));
            row.push_back(num(p.ci_low));
            row.push_back(num(p.ci_high));
            row.push_back(num(std::abs(p.ratio - curve.fit.slope)));
            row.push_back(std::string(seq.budgets[i].capped ? "ok(capped)" : "ok"));
        } else {
            for (const auto& [n, e] : seq.dropped)
                if (n == ns[i]) push_estimate(row, e);
            for (int k = 0; k < 4; ++k) row.emplace_back();
            row.push_back(std::string("undersampled"));
        }
        t.add_row(std::move(row));
    }
    t.summary = {{"b_hat", num(curve.fit.slope)},
                 {"b_stderr", num(curve.fit.stderr)},
                 {"approaches_b", ratios_approach(seq.points, curve.fit.slope)}};
    return t;
}

inline Table negligible(const RunConfig& c)
{
    Table t;
    t.title = "negligible";
    base_config(t, c);
    const auto ns = ns_or(c, {100, 1000, 10000});
    const std::uint64_t samples = c.samples.value_or(100000);
    t.config.push_back({"n", join(ns)});
    t.config.push_back({"samples", std::to_string(samples)});
    PersistenceOptions opt;
    opt.workers = c.workers;
    const auto rows = negligible_interval_report(ns, samples, c.seed, opt);
    t.columns = {{"n", "1"}, {"interval", "1"}};
    estimate_columns(t);
    t.columns.push_back({"neg_log_p_over_sqrt_n", "1"});
    t.columns.push_back({"floor_from_ci_high", "1"});
    t.columns.push_back({"low_high_agree", "bool"});
    for (const auto& r : rows) {
        std::vector<Cell> row{static_cast<std::int64_t>(r.n), std::string(interval_name(r.kind))};
        push_estimate(row, r.estimate);
        row.push_back(std::isfinite(r.score) ? num(r.score) : Cell{});
        row.push_back(num(r.score_bound));
        row.push_back(r.symmetric_with_partner);
        t.add_row(std::move(row));
    }
    return t;
}

inline Table game(const RunConfig& c)
{
    Table t;
    t.title = "game";
    base_config(t, c);
    if (!c.n) throw UsageError("game: --n (number of players) is required");
    const int players = *c.n;
    if (players < 2) throw UsageError("game: need at least 2 players");
    const std::uint64_t samples = c.samples.value_or(1000);
    t.config.push_back({"n", std::to_string(players)});
    t.config.push_back({"samples", std::to_string(samples)});
    t.columns = {{"n", "1"}, {"sample_id", "1"}, {"equilibria", "count"}, {"y_values", "fraction"}};
    std::uint64_t none = 0, degenerate = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        RngStream stream(StreamKey{c.seed, hash_label("game"), static_cast<std::uint64_t>(players), s, 0});
        const auto beta = sample_polynomial(players - 1, stream).coefficients();
        std::vector<Cell> row{static_cast<std::int64_t>(players), static_cast<std::int64_t>(s)};
        try {
            const auto eq = internal_equilibria(GamePayoffs::from_differences(beta));
            std::string ys;
            for (std::size_t i = 0; i < eq.internal.size(); ++i) ys += (i ? ";" : "") + format_double(eq.internal[i]);
            row.push_back(static_cast<std::int64_t>(eq.count));
            row.push_back(ys);
            if (eq.count == 0) ++none;
        } catch (const DegenerateGame&) {
            row.emplace_back();
            row.push_back(std::string("degenerate"));
            ++degenerate;
        }
        t.add_row(std::move(row));
    }
    const auto e = PersistenceEstimate::from_counts(none, samples);
    t.summary = {{"p_no_internal", num(e.p_hat)},
                 {"ci_low", num(e.ci_low)},
                 {"ci_high", num(e.ci_high)},
                 {"degenerate", count(degenerate)}};
    return t;
}

inline Table b1_report(const RunConfig& c)
{
    Table t;
    t.title = "b1-report";
    base_config(t, c);
    const auto ns = ns_or(c, {10000, 100000, 1000000});
    const auto lags = c.lags.empty() ? default_lags() : c.lags;
    t.config.push_back({"n", join(ns)});
    t.config.push_back({"lags", join(lags)});
    t.columns = {{"n", "1"}, {"lag", "time"}, {"sup_gap", "1"}, {"worst_u", "time"}};
    for (const auto& r : b1_convergence_report(ns, lags)) t.add_row({static_cast<std::int64_t>(r.n), num(r.lag), num(r.sup_gap), num(r.worst_u)});
    return t;
}

inline PlotSpec plot_for(const Table& t)
{
    PlotSpec p;
    auto column_values = [&](const std::string& name) {
        std::vector<double> v;
        for (std::size_t i = 0; i < t.rows.size(); ++i) v.push_back(t.number(i, name));
        return v;
    };
    if (t.title == "mn-check") {
        p = {"M_n: log-scale discrepancies", "x", "relative error", true, {}};
        p.series.push_back({"legendre", column_values("x"), column_values("rel_err_legendre"), {}, {}});
        p.series.push_back({"asymptotic", column_values("x"), column_values("rel_err_asymptotic"), {}, {}});
    } else if (t.title == "persist" || t.title == "ratio") {
        const bool ratio = t.title == "ratio";
        p = {ratio ? "-log p_n / (pi sqrt n)" : "persistence probability", "n", ratio ? "ratio" : "p_hat", !ratio, {}};
        if (ratio)
            p.series.push_back({"ratio", column_values("n"), column_values("ratio"), column_values("ratio_ci_low"),
                                column_values("ratio_ci_high")});
        else
            p.series.push_back({"p_hat", column_values("n"), column_values("p_hat"), column_values("ci_low"),
                                column_values("ci_high")});
        if (ratio) {
            const auto n = column_values("n");
            p.series.push_back({"b_hat", n, std::vector<double>(n.size(), t.summary_number("b_hat")), {}, {}});
        }
    } else if (t.title == "gp-exponent") {
        p = {"survival of the Gaussian process", "T", "p_hat", true, {}};
        p.series.push_back({"p_hat", column_values("T"), column_values("p_hat"), column_values("ci_low"), column_values("ci_high")});
    } else if (t.title == "negligible") {
        p = {"restricted-interval persistence", "n", "-log p / sqrt n", false, {}};
        for (const char* kind : {"low", "high"}) {
            PlotSeries s{kind, {}, {}, {}, {}};
            for (std::size_t i = 0; i < t.rows.size(); ++i)
                if (std::get<std::string>(t.rows[i][t.column("interval")]) == kind) {
                    s.x.push_back(t.number(i, "n"));
                    s.y.push_back(t.number(i, "neg_log_p_over_sqrt_n"));
                }
            p.series.push_back(std::move(s));
        }
    } else if (t.title == "b1-report") {
        p = {"sup |A_n - exp(-lag^2/4)|", "lag", "gap", true, {}};
        std::vector<double> ns;
        for (std::size_t i = 0; i < t.rows.size(); ++i)
            if (std::find(ns.begin(), ns.end(), t.number(i, "n")) == ns.end()) ns.push_back(t.number(i, "n"));
        for (double n : ns) {
            PlotSeries s{"n=" + format_double(n), {}, {}, {}, {}};
            for (std::size_t i = 0; i < t.rows.size(); ++i)
                if (t.number(i, "n") == n) {
                    s.x.push_back(t.number(i, "lag"));
                    s.y.push_back(t.number(i, "sup_gap"));
                }
            p.series.push_back(std::move(s));
        }
    } else if (t.title == "game") {
        p = {"internal equilibria per sampled game", "sample", "count", false, {}};
        p.series.push_back({"equilibria", column_values("sample_id"), column_values("equilibria"), {}, {}});
    }
    return p;
}

} // namespace detail

/// Result table of one command; throws UsageError for bad configurations
/// and std::exception for numerical failures.
inline Table execute(const RunConfig& c)
{
    if (c.format != "csv" && c.format != "json") throw UsageError("--format must be csv or json");
    if (c.plot && c.out.empty()) throw UsageError("--plot needs --out (the SVG is written next to it)");
    if (c.workers == 0) throw UsageError("--workers must be at least 1");
    if (c.command == "mn-check") return detail::mn_check(c);
    if (c.command == "persist") return detail::persist(c);
    if (c.command == "ratio") return detail::ratio(c);
    if (c.command == "gp-exponent") return detail::gp_exponent(c);
    if (c.command == "negligible") return detail::negligible(c);
    if (c.command == "game") return detail::game(c);
    if (c.command == "b1-report") return detail::b1_report(c);
    throw UsageError("unknown command '" + c.command + "'");
}

inline std::string render(const Table& t, const std::string& format, bool with_timestamp = true)
{
    return format == "json" ? to_json(t, kVersion) : to_csv(t, kVersion, with_timestamp);
}

/// The reproducible part of a rendered table.
inline std::string payload(const Table& t, const std::string& format) { return render(t, format, false); }

/// Full command: execute, render, write. Exit status 0 on success, 2 on
/// usage errors, 1 on numerical failures; one diagnostic line on stderr.
inline int run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    try {
        const Table t = execute(c);
        const std::string text = render(t, c.format);
        if (c.out.empty()) {
            out << text;
        } else {
            std::ofstream f(c.out, std::ios::binary);
            if (!f) throw std::runtime_error("cannot open output file " + c.out);
            f << text;
        }
        if (c.plot) {
            std::ofstream f(c.out + ".svg", std::ios::binary);
            if (!f) throw std::runtime_error("cannot open plot file " + c.out + ".svg");
            f << to_svg(detail::plot_for(t));
        }
        return 0;
    } catch (const UsageError& e) {
        err << "persistlab: usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "persistlab: " << c.command << " failed: " << e.what() << "\n";
        return 1;
    }
}

} // namespace persistlab
