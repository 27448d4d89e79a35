#pragma once

// n-player two-strategy games. With y the fraction of A-players, the
// replicator dynamics is y' = y (1 - y) (pi_A(y) - pi_B(y)), and an internal
// rest point y in (0, 1) is a positive root x = y / (1 - y) of
// sum_k beta_k C(n-1, k) x^k with beta_k = a_k - b_k, which is f_{n-1}.

#include "persistlab/parallel.hpp"
#include "persistlab/polycore.hpp"
#include "persistlab/random.hpp"
#include "persistlab/rootcount.hpp"
#include "persistlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace persistlab {

struct GamePayoffs {
    std::vector<double> a; // a_k: payoff to an A-player facing k other A-players
    std::vector<double> b;

    GamePayoffs(std::vector<double> a_, std::vector<double> b_) : a(std::move(a_)), b(std::move(b_))
    {
        if (a.size() < 2 || a.size() != b.size())
            throw std::invalid_argument("GamePayoffs: need equal-length payoff sequences for n >= 2 players");
    }

    /// A game with prescribed differences beta (b = 0).
    static GamePayoffs from_differences(std::vector<double> beta)
    {
        std::vector<double> zeros(beta.size(), 0.0);
        return {std::move(beta), std::move(zeros)};
    }

    int players() const { return static_cast<int>(a.size()); }

    std::vector<double> differences() const
    {
        std::vector<double> beta(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) beta[k] = a[k] - b[k];
        return beta;
    }
};

/// sum_k c_k C(m,k) y^k (1-y)^(m-k) by de Casteljau; returns c_0 at y = 0
/// and c_m at y = 1 exactly.
inline double bernstein_value(std::vector<double> c, double y)
{
    for (std::size_t level = 1; level < c.size(); ++level)
        for (std::size_t i = 0; i + level < c.size(); ++i) c[i] = std::lerp(c[i], c[i + 1], y);
    return c.front();
}

inline double payoff_A(const GamePayoffs& g, double y)
{
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("payoff_A: y must lie in [0,1]");
    return bernstein_value(g.a, y);
}

inline double payoff_B(const GamePayoffs& g, double y)
{
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("payoff_B: y must lie in [0,1]");
    return bernstein_value(g.b, y);
}

inline double replicator_rhs(const GamePayoffs& g, double y)
{
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("replicator_rhs: y must lie in [0,1]");
    if (y == 0.0 || y == 1.0) return 0.0;
    return y * (1.0 - y) * bernstein_value(g.differences(), y);
}

struct DegenerateGame : std::domain_error {
    DegenerateGame() : std::domain_error("internal_equilibria: beta is identically zero, every y is an equilibrium") {}
};

struct EquilibriumSet {
    std::vector<double> internal; // increasing y in (0, 1)
    int count = 0;                // distinct positive roots of the x-polynomial
};

inline DyadicPolynomial equilibrium_polynomial(const GamePayoffs& g)
{
    return DyadicPolynomial::from_binomial(BinomialPolynomial(g.differences()));
}

/// Locations to 1e-12 relative in x, mapped through y = x / (1 + x).
inline EquilibriumSet internal_equilibria(const GamePayoffs& g, double x_tol = 1e-12)
{
    const DyadicPolynomial p = equilibrium_polynomial(g);
    if (p.is_zero()) throw DegenerateGame();
    EquilibriumSet out;
    out.count = count_positive_roots(p).count;
    for (double x : locate_positive_roots(p, x_tol)) out.internal.push_back(x / (1.0 + x));
    return out;
}

struct GameEstimate {
    PersistenceEstimate no_internal;
    std::uint64_t degenerate = 0; // all-zero beta draws, counted as samples with equilibria everywhere
};

/// Fraction of games with i.i.d. standard normal beta_k and no internal
/// equilibrium. `sampler` may replace the normal draw.
inline GameEstimate prob_no_internal_equilibria(int players, std::uint64_t samples, std::uint64_t seed,
                                                unsigned workers = 1,
                                                const std::function<double(RngStream&)>& sampler = {})
{
    if (players < 2) throw std::invalid_argument("prob_no_internal_equilibria: need at least 2 players");
    if (samples == 0) throw std::invalid_argument("prob_no_internal_equilibria: need samples > 0");
    std::vector<std::uint64_t> hits(std::max(1u, workers), 0), degenerate(std::max(1u, workers), 0);
    parallel_blocks(samples, workers, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t s = begin; s < end; ++s) {
            RngStream stream(StreamKey{seed, hash_label("game"), static_cast<std::uint64_t>(players), s, 0});
            std::vector<double> beta(players);
            if (sampler) {
                for (auto& v : beta) v = sampler(stream);
            } else {
                beta = sample_polynomial(players - 1, stream).coefficients();
            }
            const DyadicPolynomial p = DyadicPolynomial::from_binomial(BinomialPolynomial(beta));
            if (p.is_zero()) {
                ++degenerate[w];
                continue;
            }
            if (count_positive_roots(p).count == 0) ++hits[w];
        }
    });
    GameEstimate out;
    std::uint64_t total = 0;
    for (std::size_t w = 0; w < hits.size(); ++w) {
        total += hits[w];
        out.degenerate += degenerate[w];
    }
    out.no_internal = PersistenceEstimate::from_counts(total, samples);
    return out;
}

} // namespace persistlab
