#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace lanczos_lab::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergent = 3;

/** Parse outcome: a config to run, or an exit code (help, usage error). */
struct CliResult {
    std::optional<ExperimentConfig> config;
    int exit_code = kExitOk;
};

/**
 * Builds a config from argv. A --config file is applied first and explicit flags
 * override it. Errors print a diagnostic and usage to `err`.
 */
inline CliResult cli_parse(int argc, const char* const* argv, std::ostream& out = std::cout,
                           std::ostream& err = std::cerr)
{
    CLI::App app{"Lanczos finite-precision experiments"};
    app.set_version_flag("--version", std::string(LANCZOS_LAB_VERSION));

    std::string experiment, ensemble, precision, config_file, out_dir;
    std::size_t n = 0, k = 0, trials = 0;
    double d = 0.0, quota = 0.0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool no_svg = false;

    auto* o_exp = app.add_option("--experiment", experiment,
                                 "coeff-forward-error | backward-reconstruction | poly-growth | moment-gaps | "
                                 "cg-random-systems | bound-audit");
    auto* o_n = app.add_option("--n", n, "matrix dimension");
    auto* o_k = app.add_option("--k", k, "Lanczos steps");
    auto* o_d = app.add_option("--d", d, "aspect ratio of covariance ensembles, in (0,1)");
    auto* o_prec = app.add_option("--precision", precision, "comma list of low32, work64, ext128");
    auto* o_trials = app.add_option("--trials", trials, "number of seeds");
    auto* o_seed = app.add_option("--seed", seed, "base seed; trial t uses seed + t");
    auto* o_out = app.add_option("--out", out_dir, "output directory");
    app.add_option("--config", config_file, "JSON config file; flags override its keys");
    auto* o_threads = app.add_option("--threads", threads, "worker threads (0 = hardware)");
    auto* o_ens = app.add_option("--ensemble", ensemble, "goe | wigner | wishart | rademacher");
    auto* o_quota = app.add_option("--divergent-quota", quota, "allowed fraction of divergent trials");
    auto* o_nosvg = app.add_flag("--no-svg", no_svg, "skip the SVG plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return {std::nullopt, kExitOk};
    } catch (const CLI::CallForVersion&) {
        out << LANCZOS_LAB_VERSION << '\n';
        return {std::nullopt, kExitOk};
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return {std::nullopt, kExitConfig};
    }

    ExperimentConfig cfg;
    try {
        if (!config_file.empty()) load_config_file(cfg, config_file);
        if (*o_exp) cfg.experiment = parse_experiment(experiment);
        if (*o_ens) {
            try {
                cfg.ensemble = parse_ensemble_kind(ensemble);
            } catch (const std::exception& e) {
                throw ConfigError("ensemble", e.what());
            }
        }
        if (*o_n) cfg.n = n;
        if (*o_k) cfg.k = k;
        if (*o_d) cfg.d = d;
        if (*o_trials) cfg.trials = trials;
        if (*o_seed) cfg.seed = seed;
        if (*o_out) cfg.out = out_dir;
        if (*o_threads) cfg.threads = threads;
        if (*o_quota) cfg.divergent_quota = quota;
        if (*o_nosvg) cfg.svg = false;
        if (*o_prec) cfg.precisions = parse_precision_list(precision);
        cfg.resolve();
        cfg.validate();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return {std::nullopt, kExitConfig};
    }
    return {cfg, kExitOk};
}

/** Full CLI: parse, run, write outputs. Returns the process exit code. */
inline int cli_main(int argc, const char* const* argv)
{
    auto parsed = cli_parse(argc, argv);
    if (!parsed.config) return parsed.exit_code;
    const auto& cfg = *parsed.config;
    try {
        auto res = run_experiment(cfg);
        std::cout << to_string(cfg.experiment) << ": " << res.rows.size() << " rows, " << res.divergent_trials
                  << " divergent of " << *cfg.trials << " trials, " << res.wall_seconds << " s -> " << cfg.out << '\n';
        if (res.quota_exceeded) {
            std::cerr << "divergent-run quota exceeded\n";
            return kExitDivergent;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}

}  // namespace lanczos_lab::harness
