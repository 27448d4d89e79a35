#pragma once

// The stationary Gaussian process with covariance exp(-t^2 / (2 s^2)) and
// its persistence probability P(min over [0, T] of Z > 0).
//
// Primary sampler: Z(t) = sum_k xi_k phi_k(t) with
// phi_k(t) = exp(-u^2/2) u^k / sqrt(k!), u = t/s. The untruncated series has
// covariance exp(-(t-v)^2/(2 s^2)) exactly, and sum_{k>K} phi_k(t)^2 is the
// Poisson(u^2) tail P(N > K), so truncation error is certifiable.
// Plain Cholesky of the grid covariance is kept only as a cross-check.

#include "persistlab/parallel.hpp"
#include "persistlab/random.hpp"
#include "persistlab/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/special_functions/gamma.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace persistlab {

struct GaussianKernel {
    double scale = std::numbers::sqrt2; // R(t) = exp(-t^2/(2 s^2)); sqrt 2 gives exp(-t^2/4)

    explicit GaussianKernel(double s = std::numbers::sqrt2) : scale(s)
    {
        if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("GaussianKernel: scale must be positive");
    }

    double operator()(double lag) const { return std::exp(-lag * lag / (2.0 * scale * scale)); }
};

/// Uniform points 0 = t_0 < ... < t_m = T with m = ceil(T / step), so the
/// spacing is the largest T/m not above `step` and T itself is on the grid.
struct GridSpec {
    double horizon;
    double step; // maximal spacing

    std::size_t intervals() const
    {
        if (!(horizon >= 0.0) || !(step > 0.0)) throw std::invalid_argument("GridSpec: need T >= 0, step > 0");
        // T and step are usually decimal literals; absorb their rounding.
        return static_cast<std::size_t>(std::ceil(horizon / step * (1.0 - 1e-12)));
    }
    std::size_t size() const { return intervals() + 1; }
    double spacing() const { return intervals() == 0 ? 0.0 : horizon / static_cast<double>(intervals()); }
    double time(std::size_t j) const
    {
        const std::size_t m = intervals();
        return m == 0 ? 0.0 : horizon * static_cast<double>(j) / static_cast<double>(m);
    }
};

struct PathGrid {
    double horizon = 0.0;
    double step = 0.0;
    std::vector<double> values;
};

inline constexpr double kSeriesTailBound = 1e-12;

/// sup_{t <= T} sum_{k > K} phi_k(t)^2 = P(Poisson(T^2/s^2) > K).
inline double series_tail_variance(const GaussianKernel& kernel, double horizon, int truncation)
{
    const double lambda = (horizon / kernel.scale) * (horizon / kernel.scale);
    if (lambda == 0.0) return 0.0;
    return boost::math::gamma_p(static_cast<double>(truncation) + 1.0, lambda);
}

/// Smallest K meeting the tail bound on [0, T].
inline int minimal_truncation(const GaussianKernel& kernel, double horizon, double bound = kSeriesTailBound)
{
    int k = 0;
    while (series_tail_variance(kernel, horizon, k) >= bound) {
        if (++k > 100000) throw std::runtime_error("minimal_truncation: horizon too long");
    }
    return k;
}

/// Basis matrix phi_k(t_j) for one grid, reused by every path.
class SeriesSampler {
public:
    SeriesSampler(const GaussianKernel& kernel, GridSpec grid, int truncation)
        : kernel_(kernel), grid_(grid), truncation_(truncation)
    {
        if (truncation < 0) throw std::invalid_argument("SeriesSampler: negative truncation");
        const double tail = series_tail_variance(kernel, grid.time(grid.size() - 1), truncation);
        if (!(tail < kSeriesTailBound))
            throw std::domain_error("SeriesSampler: truncation K = " + std::to_string(truncation) +
                                    " leaves tail variance " + std::to_string(tail) + " >= 1e-12 on [0, T]");
        const std::size_t m = grid.size();
        basis_.resize(static_cast<Eigen::Index>(m), truncation + 1);
        for (std::size_t j = 0; j < m; ++j) {
            const double u = grid.time(j) / kernel.scale;
            for (int k = 0; k <= truncation; ++k) {
                double v;
                if (u == 0.0)
                    v = (k == 0) ? 1.0 : 0.0;
                else
                    v = std::exp(-0.5 * u * u + k * std::log(u) - 0.5 * std::lgamma(k + 1.0));
                basis_(static_cast<Eigen::Index>(j), k) = v;
            }
        }
    }

    SeriesSampler(const GaussianKernel& kernel, GridSpec grid)
        : SeriesSampler(kernel, grid, minimal_truncation(kernel, grid.time(grid.size() - 1)))
    {
    }

    int truncation() const { return truncation_; }
    const GridSpec& grid() const { return grid_; }

    PathGrid sample(RngStream& stream) const
    {
        Eigen::VectorXd xi(truncation_ + 1);
        for (auto& v : xi) v = stream.normal();
        const Eigen::VectorXd z = basis_ * xi;
        return {grid_.horizon, grid_.spacing(), std::vector<double>(z.begin(), z.end())};
    }

    /// min_j Z(t_j) > 0, stopping at the first nonpositive value.
    bool survives(RngStream& stream) const
    {
        Eigen::VectorXd xi(truncation_ + 1);
        for (auto& v : xi) v = stream.normal();
        for (Eigen::Index j = 0; j < basis_.rows(); ++j)
            if (!(basis_.row(j).dot(xi) > 0.0)) return false;
        return true;
    }

private:
    GaussianKernel kernel_;
    GridSpec grid_;
    int truncation_;
    Eigen::MatrixXd basis_;
};

struct FactorizationError : std::runtime_error {
    double jitter;
    FactorizationError(double j, const std::string& what) : std::runtime_error(what), jitter(j) {}
};

/// Lower Cholesky factor of the grid covariance plus jitter * I.
class FactorSampler {
public:
    FactorSampler(const GaussianKernel& kernel, GridSpec grid, double jitter) : grid_(grid), jitter_(jitter)
    {
        const auto m = static_cast<Eigen::Index>(grid.size());
        Eigen::MatrixXd cov(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                cov(i, j) = kernel(grid.time(static_cast<std::size_t>(i)) - grid.time(static_cast<std::size_t>(j)));
        cov.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw FactorizationError(jitter, "FactorSampler: covariance not positive definite with jitter " +
                                                  std::to_string(jitter));
        lower_ = llt.matrixL();
    }

    /// Tries jitter, 10 jitter, ... up to max_jitter.
    static FactorSampler with_escalation(const GaussianKernel& kernel, GridSpec grid, double jitter = 1e-12,
                                         double max_jitter = 1e-8)
    {
        for (double j = jitter;; j *= 10.0) {
            try {
                return FactorSampler(kernel, grid, j);
            } catch (const FactorizationError&) {
                if (j * 10.0 > max_jitter * (1.0 + 1e-9)) throw;
            }
        }
    }

    double jitter() const { return jitter_; }
    const GridSpec& grid() const { return grid_; }

    PathGrid sample(RngStream& stream) const
    {
        Eigen::VectorXd xi(lower_.rows());
        for (auto& v : xi) v = stream.normal();
        const Eigen::VectorXd z = lower_.triangularView<Eigen::Lower>() * xi;
        return {grid_.horizon, grid_.spacing(), std::vector<double>(z.begin(), z.end())};
    }

    bool survives(RngStream& stream) const
    {
        // Z_j only needs xi_0..xi_j, so innovations are drawn as they are used.
        Eigen::VectorXd xi(lower_.rows());
        for (Eigen::Index j = 0; j < lower_.rows(); ++j) {
            xi(j) = stream.normal();
            if (!(lower_.row(j).head(j + 1).dot(xi.head(j + 1)) > 0.0)) return false;
        }
        return true;
    }

private:
    GridSpec grid_;
    double jitter_;
    Eigen::MatrixXd lower_;
};

enum class SamplerKind { series, factor };

inline StreamKey survival_stream(std::uint64_t seed, SamplerKind kind, const GaussianKernel& kernel, GridSpec grid,
                                 std::uint64_t sample)
{
    const std::uint64_t domain = hash_label(kind == SamplerKind::series ? "gp-series" : "gp-factor") ^
                                 std::bit_cast<std::uint64_t>(kernel.scale);
    return {seed, domain, std::bit_cast<std::uint64_t>(grid.horizon), std::bit_cast<std::uint64_t>(grid.step), sample};
}

/// Fraction of sampled paths positive at every grid point of [0, T].
template <typename Sampler>
PersistenceEstimate estimate_survival(const Sampler& sampler, SamplerKind kind, const GaussianKernel& kernel,
                                      std::uint64_t samples, std::uint64_t seed, unsigned workers = 1)
{
    if (samples < 1000) throw std::invalid_argument("estimate_survival: need at least 1000 samples");
    std::vector<std::uint64_t> hits(std::max(1u, workers), 0);
    parallel_blocks(samples, workers, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
        std::uint64_t local = 0;
        for (std::uint64_t s = begin; s < end; ++s) {
            RngStream stream(survival_stream(seed, kind, kernel, sampler.grid(), s));
            local += sampler.survives(stream) ? 1 : 0;
        }
        hits[w] = local;
    });
    std::uint64_t total = 0;
    for (auto h : hits) total += h;
    return PersistenceEstimate::from_counts(total, samples);
}

inline PersistenceEstimate estimate_survival(const GaussianKernel& kernel, double horizon, double step,
                                             std::uint64_t samples, std::uint64_t seed, unsigned workers = 1,
                                             SamplerKind kind = SamplerKind::series)
{
    if (!(step > 0.0 && step <= 0.25 + 1e-15))
        throw std::invalid_argument("estimate_survival: step must lie in (0, 0.25]");
    const GridSpec grid{horizon, step};
    if (kind == SamplerKind::series) {
        const SeriesSampler sampler(kernel, grid);
        return estimate_survival(sampler, kind, kernel, samples, seed, workers);
    }
    const FactorSampler sampler = FactorSampler::with_escalation(kernel, grid);
    return estimate_survival(sampler, kind, kernel, samples, seed, workers);
}

struct FitPoint {
    double horizon;
    double log_p;
    double stderr;
};

struct ExponentFit {
    double slope = 0.0; // b_hat = -d log p / dT
    double intercept = 0.0;
    double stderr = 0.0;
    double chi2 = 0.0;
    std::vector<FitPoint> points;
};

/// Weighted least squares of log p on T over points with T >= t_min and a
/// finite stderr, weights 1/stderr^2. The slope error is the known-variance
/// one, inflated by sqrt(chi^2/dof) when the scatter exceeds the stated
/// errors (never deflated).
inline ExponentFit fit_exponent(const std::vector<FitPoint>& points, double t_min = 3.0)
{
    ExponentFit fit;
    for (const auto& p : points)
        if (p.horizon >= t_min && std::isfinite(p.log_p) && std::isfinite(p.stderr) && p.stderr > 0.0)
            fit.points.push_back(p);
    const std::size_t m = fit.points.size();
    if (m < 4) throw std::domain_error("fit_exponent: fewer than 4 usable points with T >= " + std::to_string(t_min));
    double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
    for (const auto& p : fit.points) {
        const double w = 1.0 / (p.stderr * p.stderr);
        sw += w;
        st += w * p.horizon;
        sy += w * p.log_p;
        stt += w * p.horizon * p.horizon;
        sty += w * p.horizon * p.log_p;
    }
    const double det = sw * stt - st * st;
    const double slope = (sw * sty - st * sy) / det;
    fit.intercept = (sy - slope * st) / sw;
    fit.slope = -slope;
    for (const auto& p : fit.points) {
        const double r = (p.log_p - (fit.intercept + slope * p.horizon)) / p.stderr;
        fit.chi2 += r * r;
    }
    const double inflation = std::max(1.0, fit.chi2 / static_cast<double>(m - 2));
    fit.stderr = std::sqrt(sw / det * inflation);
    return fit;
}

struct SurvivalCurve {
    std::vector<PersistenceEstimate> estimates;
    std::vector<double> horizons;
    ExponentFit fit;
};

/// Survival at each horizon (independent streams per horizon) and the
/// exponent fit over the usable ones.
inline SurvivalCurve exponent_pipeline(const GaussianKernel& kernel, const std::vector<double>& horizons, double step,
                                       std::uint64_t samples, std::uint64_t seed, unsigned workers = 1,
                                       double t_min = 3.0)
{
    SurvivalCurve out;
    out.horizons = horizons;
    std::vector<FitPoint> pts;
    for (double T : horizons) {
        const auto e = estimate_survival(kernel, T, step, samples, seed, workers);
        out.estimates.push_back(e);
        if (e.usable_for_log()) pts.push_back({T, std::log(e.p_hat), e.log_stderr()});
    }
    out.fit = fit_exponent(pts, t_min);
    return out;
}

} // namespace persistlab
