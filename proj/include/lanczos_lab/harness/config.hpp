#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "../ensembles.hpp"
#include "../scalars.hpp"

namespace lanczos_lab::harness {

enum class ExperimentKind { CoeffForwardError, BackwardReconstruction, PolyGrowth, MomentGaps, CgRandomSystems, BoundAudit };

inline std::string_view to_string(ExperimentKind e)
{
    switch (e) {
    case ExperimentKind::CoeffForwardError: return "coeff-forward-error";
    case ExperimentKind::BackwardReconstruction: return "backward-reconstruction";
    case ExperimentKind::PolyGrowth: return "poly-growth";
    case ExperimentKind::MomentGaps: return "moment-gaps";
    case ExperimentKind::CgRandomSystems: return "cg-random-systems";
    case ExperimentKind::BoundAudit: return "bound-audit";
    }
    return "unknown";
}

/** Invalid configuration; `field` names the offending key. */
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

inline ExperimentKind parse_experiment(std::string_view s)
{
    for (auto e : {ExperimentKind::CoeffForwardError, ExperimentKind::BackwardReconstruction, ExperimentKind::PolyGrowth,
                   ExperimentKind::MomentGaps, ExperimentKind::CgRandomSystems, ExperimentKind::BoundAudit})
        if (to_string(e) == s) return e;
    throw ConfigError("experiment", "unknown experiment '" + std::string(s) + "'");
}

/**
 * Experiment settings. Unset optionals take per-experiment defaults in resolve().
 */
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::CoeffForwardError;
    std::optional<EnsembleKind> ensemble;
    std::optional<std::size_t> n, k, trials;
    std::optional<double> d;
    std::vector<Precision> precisions;
    std::uint64_t seed = 1;
    std::string out = "results";
    unsigned threads = 0;
    bool svg = true;
    double divergent_quota = 0.1;  // fraction of trials allowed to diverge

    EnsembleKind ensemble_or_default() const
    {
        if (ensemble) return *ensemble;
        return experiment == ExperimentKind::CgRandomSystems ? EnsembleKind::CovarianceGaussian : EnsembleKind::GOE;
    }

    bool covariance() const
    {
        auto e = ensemble_or_default();
        return e == EnsembleKind::CovarianceGaussian || e == EnsembleKind::CovarianceRademacher;
    }

    /** Fills unset fields with the desk-scale defaults of the chosen experiment. */
    void resolve()
    {
        struct Defaults {
            std::size_t n, k, trials;
        };
        Defaults def{2000, 36, 20};
        switch (experiment) {
        case ExperimentKind::CoeffForwardError: def = {2000, 80, 20}; break;
        case ExperimentKind::BackwardReconstruction: def = {2000, 36, 20}; break;
        case ExperimentKind::PolyGrowth: def = {2000, 60, 20}; break;
        case ExperimentKind::MomentGaps: def = {2000, 50, 20}; break;
        case ExperimentKind::CgRandomSystems: def = {800, 30, 50}; break;
        case ExperimentKind::BoundAudit: def = {2000, 36, 20}; break;
        }
        if (!ensemble) ensemble = ensemble_or_default();
        if (!n) n = def.n;
        if (!k) k = def.k;
        if (!trials) trials = def.trials;
        if (!d) d = 0.2;
        if (precisions.empty()) precisions = {Precision::Low32};
    }

    /** Throws ConfigError naming the first invalid field. Call after resolve(). */
    void validate() const
    {
        if (*trials < 1) throw ConfigError("trials", "must be >= 1");
        if (*k < 1) throw ConfigError("k", "must be >= 1");
        if (*n < 2) throw ConfigError("n", "must be >= 2");
        if (*k > *n) throw ConfigError("k", "must not exceed n");
        if (!(*d > 0.0 && *d < 1.0))
            throw ConfigError("d", "d must be in (0,1)");
        if (experiment == ExperimentKind::CgRandomSystems && !covariance())
            throw ConfigError("ensemble", "cg-random-systems needs a covariance ensemble");
        if (*ensemble == EnsembleKind::ExplicitDiagonal) throw ConfigError("ensemble", "diagonal is not a random ensemble");
        if (!(divergent_quota >= 0.0 && divergent_quota <= 1.0)) throw ConfigError("divergent_quota", "must be in [0,1]");
        const bool needs_two_k = experiment == ExperimentKind::BackwardReconstruction ||
                                 experiment == ExperimentKind::MomentGaps || experiment == ExperimentKind::BoundAudit;
        if (needs_two_k && 2 * *k > *n) throw ConfigError("k", "2k must not exceed n for moment-based experiments");
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["experiment"] = std::string(to_string(experiment));
        j["ensemble"] = std::string(to_string(ensemble_or_default()));
        if (n) j["n"] = *n;
        if (k) j["k"] = *k;
        if (d) j["d"] = *d;
        if (trials) j["trials"] = *trials;
        std::vector<std::string> ps;
        for (auto p : precisions) ps.emplace_back(to_string(p));
        j["precision"] = ps;
        j["seed"] = seed;
        j["out"] = out;
        j["threads"] = threads;
        j["svg"] = svg;
        j["divergent_quota"] = divergent_quota;
        return j;
    }
};

inline std::vector<Precision> parse_precision_list(const std::string& s)
{
    std::vector<Precision> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        auto tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            out.push_back(parse_precision(tok));
        } catch (const std::exception& e) {
            throw ConfigError("precision", e.what());
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

/** Applies keys of a JSON object onto cfg; unknown keys and wrong types are errors. */
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("config", "top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const auto& v = it.value();
        try {
            if (key == "experiment") cfg.experiment = parse_experiment(v.get<std::string>());
            else if (key == "ensemble") cfg.ensemble = parse_ensemble_kind(v.get<std::string>());
            else if (key == "n") cfg.n = v.get<std::size_t>();
            else if (key == "k") cfg.k = v.get<std::size_t>();
            else if (key == "d") cfg.d = v.get<double>();
            else if (key == "trials") cfg.trials = v.get<std::size_t>();
            else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (key == "out") cfg.out = v.get<std::string>();
            else if (key == "threads") cfg.threads = v.get<unsigned>();
            else if (key == "svg") cfg.svg = v.get<bool>();
            else if (key == "divergent_quota") cfg.divergent_quota = v.get<double>();
            else if (key == "precision") {
                if (v.is_string()) cfg.precisions = parse_precision_list(v.get<std::string>());
                else {
                    cfg.precisions.clear();
                    for (const auto& p : v) cfg.precisions.push_back(parse_precision(p.get<std::string>()));
                }
            } else
                throw ConfigError(key, "unknown key");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(key, e.what());
        }
    }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config", std::string("parse error: ") + e.what());
    }
    apply_json(cfg, j);
}

}  // namespace lanczos_lab::harness
