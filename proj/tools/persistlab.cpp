// persistlab: batch driver for the persistence-probability pipelines.
//
//   persistlab persist --n 1 --samples 100000 --seed 7
//   persistlab gp-exponent --horizons 3,4,5,6,7,8,9,10,11,12 --samples 200000 --format json
//
// Exit status: 0 success, 2 usage error, 1 numerical failure.

#include "persistlab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

int main(int argc, char** argv)
{
    using namespace persistlab;
    RunConfig cfg;
    CLI::App app{"persistlab: persistence probabilities of binomial random polynomials"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string interval = "full";
    int n = 0;
    std::uint64_t samples = 0;
    double delta = 0.0;
    const std::map<std::string, std::string> about{
        {"mn-check", "M_n(x) by direct sum, asymptotics and the Legendre identity"},
        {"persist", "P(f_n > 0 on an interval) by Monte Carlo"},
        {"ratio", "-log p_n / (pi sqrt n) against the process exponent"},
        {"gp-exponent", "survival curve and exponent of the limiting process"},
        {"negligible", "scores on (0, n^-1/6) and (n^1/6, inf)"},
        {"game", "P(no internal equilibrium) for random n-player games"},
        {"b1-report", "sup gap between exact and limiting correlations"},
    };
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--n", n, "degree (players for game)");
        sub->add_option("--n-list", cfg.n_list, "comma-separated degrees")->delimiter(',');
        sub->add_option("--samples", samples, "Monte Carlo sample count");
        sub->add_option("--seed", cfg.seed, "master seed");
        sub->add_option("--workers", cfg.workers, "worker threads");
        sub->add_option("--delta", delta, "grid step of the process sampler");
        sub->add_option("--horizons", cfg.horizons, "comma-separated horizons T")->delimiter(',');
        sub->add_option("--interval", interval, "full, low, high or main")
            ->check(CLI::IsMember({"full", "low", "high", "main"}));
        sub->add_option("--scale", cfg.scale, "kernel scale s in exp(-t^2/(2 s^2))");
        sub->add_option("--sampler", cfg.sampler, "series or factor")->check(CLI::IsMember({"series", "factor"}));
        sub->add_option("--lags", cfg.lags, "comma-separated lags for b1-report")->delimiter(',');
        sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--plot", cfg.plot, "also write PATH.svg");
        sub->add_option("--out", cfg.out, "output path (default stdout)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    if (sub->count("--n")) cfg.n = n;
    if (sub->count("--samples")) cfg.samples = samples;
    if (sub->count("--delta")) cfg.delta = delta;
    try {
        cfg.interval = parse_interval(interval);
    } catch (const std::exception& e) {
        std::cerr << "persistlab: usage error: " << e.what() << "\n";
        return 2;
    }
    return run(cfg);
}
