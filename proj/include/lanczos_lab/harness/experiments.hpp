#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "../ensembles.hpp"
#include "../io.hpp"
#include "../krylov.hpp"
#include "../lanczos.hpp"
#include "../measures.hpp"
#include "../orthopoly.hpp"
#include "../stability.hpp"
#include "config.hpp"
#include "pool.hpp"
#include "svg.hpp"

#ifndef LANCZOS_LAB_VERSION
#define LANCZOS_LAB_VERSION "unversioned"
#endif

namespace lanczos_lab::harness {

/** One CSV record. An empty seed marks an aggregate over all trials. */
struct ResultRow {
    std::string experiment;
    std::optional<std::uint64_t> seed;
    std::size_t n_or_k = 0;
    std::string quantity;
    double value = 0.0;
    std::string precision;
};

inline constexpr const char* kCsvHeader = "experiment,seed,n_or_k,quantity,value,precision";

inline void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows)
{
    os << kCsvHeader << '\n';
    for (const auto& r : rows)
        os << r.experiment << ',' << (r.seed ? std::to_string(*r.seed) : std::string("all")) << ',' << r.n_or_k << ','
           << r.quantity << ',' << io::fmt(r.value) << ',' << r.precision << '\n';
}

/** Linear-interpolation quantile of an unsorted sample. */
inline double quantile(std::vector<double> v, double q)
{
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<ResultRow> rows;       // per-trial rows in trial order, then aggregates
    std::size_t divergent_trials = 0;
    bool quota_exceeded = false;
    double wall_seconds = 0.0;
    std::vector<nlohmann::json> reports;  // bound-audit only
};

namespace detail {

struct TrialContext {
    const ExperimentConfig& cfg;
    std::uint64_t seed;
    std::string name;
    std::vector<ResultRow>& rows;
    std::vector<nlohmann::json>* reports = nullptr;

    void add(std::size_t n, const std::string& q, double v, std::string_view prec)
    {
        rows.push_back({name, seed, n, q, v, std::string(prec)});
    }
};

inline ProblemInstance trial_problem(const ExperimentConfig& cfg, std::uint64_t seed, bool ones_vector = false)
{
    EnsembleSpec s;
    s.kind = *cfg.ensemble;
    s.n = *cfg.n;
    s.aspect_d = *cfg.d;
    s.seed = seed;
    s.ones_vector = ones_vector;
    return sample(s);
}

/** Limiting measure of the ensemble: semicircle on [−1, 1] or Marchenko–Pastur(d). */
inline Measure limit_measure(const ExperimentConfig& cfg)
{
    return cfg.covariance() ? Measure::marchenko_pastur(*cfg.d) : Measure::semicircle(-1.0, 1.0);
}

inline std::pair<double, double> limit_coefficients(const ExperimentConfig& cfg, std::size_t n)
{
    if (!cfg.covariance()) return {0.0, 0.5};
    const double d = *cfg.d;
    return {n == 0 ? 1.0 : 1.0 + d, std::sqrt(d)};
}

inline LanczosRun plain_run(const ProblemInstance& p, std::size_t k, Precision prec)
{
    LanczosOptions o;
    o.k = k;
    o.precision = prec;
    return run_lanczos(p, o);
}

inline void coeff_forward_error(TrialContext& t)
{
    const std::size_t k = *t.cfg.k;
    auto problem = trial_problem(t.cfg, t.seed);
    auto exact = run_exact_lanczos(problem, k);
    for (Precision prec : t.cfg.precisions) {
        const auto tag = to_string(prec);
        auto run = plain_run(problem, k, prec);
        auto e = coefficient_errors(run.T, exact.T);
        for (std::size_t n = 0; n < run.T.size(); ++n) {
            auto [la, lb] = limit_coefficients(t.cfg, n);
            if (n < e.alpha.size()) t.add(n, "alpha_err", e.alpha[n], tag);
            if (n < e.beta.size()) t.add(n, "beta_err", e.beta[n], tag);
            t.add(n, "alpha_limit_dev", std::abs(la - run.T.alphas[n].hi), tag);
            if (n < run.T.betas.size()) t.add(n, "beta_limit_dev", std::abs(lb - run.T.betas[n].hi), tag);
        }
    }
}

inline void backward_reconstruction(TrialContext& t)
{
    const std::size_t k = *t.cfg.k;
    auto problem = trial_problem(t.cfg, t.seed);
    auto E = dense_symmetric_eigen(problem.matrix);
    const Measure mu_N = vesd(E, problem.vector);
    const SpectrumBounds sb{E.values.front(), E.values.back()};
    for (Precision prec : t.cfg.precisions) {
        const auto tag = to_string(prec);
        auto run = plain_run(problem, k, prec);
        auto h = build_h(run, mu_N);
        auto star = build_mu_star(h, mu_N);
        const auto m_bar = h.target_moments;
        const auto m_star = modified_moments(star.measure, h.reference, 2 * k).values;
        for (std::size_t n = 0; n < 2 * k; ++n) {
            const double self = n == 0 ? 1.0 : 0.0;  // m_n(μ_N; μ_N)
            t.add(n, "moment_gap", std::abs((m_bar[n] - self).hi), tag);
            t.add(n, "mustar_moment_err", std::abs((m_star[n] - m_bar[n]).hi), tag);
        }
        t.add(k, "moment_match_error", star.moment_match_error, tag);
        t.add(k, "eps_lan", measure_diagnostics(problem, run, sb).eps_lan, tag);
        try {
            auto bs = build_b_star(problem, h, E);
            t.add(k, "b_star_distance", bs.distance, tag);
            t.add(k, "h_sup_on_spectrum", bs.h_sup_on_spectrum, tag);
            auto be = verify_backward(problem, run, bs.vector);
            for (std::size_t n = 0; n < be.alpha.size(); ++n) t.add(n, "backward_alpha_err", be.alpha[n], tag);
            for (std::size_t n = 0; n < be.beta.size(); ++n) t.add(n, "backward_beta_err", be.beta[n], tag);
        } catch (const std::domain_error&) {
            t.add(k, "b_star_invalid", 1.0, tag);
        }
    }
}

inline void poly_growth(TrialContext& t)
{
    const std::size_t k = *t.cfg.k;
    auto problem = trial_problem(t.cfg, t.seed);
    // The exact run on (A, b) is the Stieltjes procedure on the VESD.
    auto exact = run_exact_lanczos(problem, k + 1);
    OrthoBasis basis;
    basis.alphas = exact.T.alphas;
    basis.betas = exact.T.betas;
    if (exact.terminated_at) basis.terminated_at = exact.terminated_at;
    auto [a, b] = limit_measure(t.cfg).support();
    for (std::size_t n = 0; n <= std::min(k, basis.max_degree()); ++n)
        t.add(n, "sup_norm", sup_norm(basis, n, a, b), to_string(Precision::Ext128));
}

inline void moment_gaps(TrialContext& t)
{
    const std::size_t k = *t.cfg.k;
    auto problem = trial_problem(t.cfg, t.seed);
    auto E = dense_symmetric_eigen(problem.matrix);
    const Measure mu_N = vesd(E, problem.vector);
    const SpectrumBounds sb{E.values.front(), E.values.back()};
    const Measure mu_inf = limit_measure(t.cfg);
    auto basis_N = stieltjes_jacobi(mu_N, 2 * k);
    auto basis_inf = stieltjes_jacobi(mu_inf, 2 * k);
    const auto self_inf = modified_moments(mu_N, basis_inf, 2 * k).values;
    for (Precision prec : t.cfg.precisions) {
        const auto tag = to_string(prec);
        auto run = plain_run(problem, k, prec);
        const Measure mu_bar = quadrature_measure(run.T);
        const auto mN = modified_moments(mu_bar, basis_N, 2 * k).values;
        const auto mi = modified_moments(mu_bar, basis_inf, 2 * k).values;
        for (std::size_t n = 0; n < 2 * k; ++n) {
            t.add(n, "gap_muN", std::abs((mN[n] - (n == 0 ? 1.0 : 0.0)).hi), tag);
            t.add(n, "gap_muinf", std::abs((mi[n] - self_inf[n]).hi), tag);
        }
        auto diag = measure_diagnostics(problem, run, sb);
        t.add(k, "eps_lan", diag.eps_lan, tag);
        auto audit = check_cheb_moment_bound(problem, run, diag, sb);
        for (const auto& r : audit.moments) {
            t.add(r.n, "cheb_gap", r.lhs, tag);
            t.add(r.n, "cheb_bound", r.rhs, tag);
        }
        t.add(k, "cheb_violations", static_cast<double>(audit.moment_violations), tag);
    }
}

inline void cg_random_systems(TrialContext& t)
{
    const std::size_t k = *t.cfg.k;
    auto problem = trial_problem(t.cfg, t.seed, true);
    const ANormOracle oracle(problem);
    for (Precision prec : t.cfg.precisions) {
        const auto tag = to_string(prec);
        auto run = plain_run(problem, k, prec);
        auto tr = solve_trace(problem, run, *t.cfg.d, oracle);
        for (std::size_t i = 0; i < tr.curve_length(); ++i) t.add(tr.ks[i], "a_norm_error", tr.errors[i], tag);
        if (tr.stagnation) {
            t.add(*tr.stagnation, "stagnation_index", static_cast<double>(*tr.stagnation), tag);
            t.add(*tr.stagnation, "stagnation_error", tr.errors[tr.curve_length() - 1], tag);
        }
    }
}

inline void bound_audit(TrialContext& t)
{
    const std::size_t k = *t.cfg.k;
    auto problem = trial_problem(t.cfg, t.seed);
    auto exact = run_exact_lanczos(problem, k);
    for (Precision prec : t.cfg.precisions) {
        const auto tag = to_string(prec);
        auto run = plain_run(problem, k, prec);
        auto rep = stability_report(problem, run, &exact);
        auto flag = [](bool b) { return b ? 1.0 : 0.0; };
        t.add(k, "eps_lan", rep.eps_lan, tag);
        t.add(k, "P_k", rep.P_k, tag);
        t.add(k, "gap_mustar_muN", rep.gap_star_N, tag);
        t.add(k, "thm_a_rhs", rep.thm_a_rhs, tag);
        t.add(k, "thm_a_holds", flag(rep.thm_a_holds), tag);
        t.add(k, "h_sup_grid", rep.h_sup_grid, tag);
        t.add(k, "thm_b_rhs", rep.thm_b_rhs, tag);
        t.add(k, "thm_b_holds", flag(rep.thm_b_holds), tag);
        t.add(k, "h_bd_rhs", rep.h_bd_rhs, tag);
        t.add(k, "h_bd_holds", flag(rep.h_bd_holds), tag);
        t.add(k, "h_sup_on_spectrum", rep.h_sup_on_spectrum, tag);
        if (rep.b_star_distance) {
            t.add(k, "b_star_distance", *rep.b_star_distance, tag);
            t.add(k, "b_star_rhs", *rep.b_star_rhs, tag);
            t.add(k, "b_star_holds", flag(*rep.b_star_holds), tag);
        }
        if (rep.triangle_holds) t.add(k, "triangle_holds", flag(*rep.triangle_holds), tag);
        if (rep.cheb) {
            t.add(k, "cheb_moment_violations", static_cast<double>(rep.cheb->moment_violations), tag);
            t.add(k, "cheb_vector_violations", static_cast<double>(rep.cheb->vector_violations), tag);
        }
        t.add(k, "bounds_satisfied", flag(rep.bounds_satisfied), tag);
        if (t.reports) {
            auto j = io::to_json(rep);
            j["seed"] = t.seed;
            t.reports->push_back(std::move(j));
        }
    }
}

/** Aggregate statistics emitted per (quantity, precision, n_or_k). */
inline std::vector<std::pair<std::string, double>> stats_for(ExperimentKind e)
{
    switch (e) {
    case ExperimentKind::PolyGrowth: return {{"q05", 0.05}, {"q50", 0.5}, {"q95", 0.95}};
    case ExperimentKind::CgRandomSystems: return {{"median", 0.5}, {"q25", 0.25}, {"q75", 0.75}};
    default: return {{"median", 0.5}};
    }
}

inline void aggregate(const ExperimentConfig& cfg, std::vector<ResultRow>& rows)
{
    const std::string name(to_string(cfg.experiment));
    std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<double>> groups;
    for (const auto& r : rows)
        if (r.quantity != "divergent_run") groups[{r.quantity, r.precision, r.n_or_k}].push_back(r.value);
    std::vector<ResultRow> agg;
    const auto stats = stats_for(cfg.experiment);
    for (const auto& [key, vals] : groups) {
        const auto& [q, prec, n] = key;
        std::map<std::string, double> got;
        for (const auto& [label, p] : stats) {
            got[label] = quantile(vals, p);
            agg.push_back({name, std::nullopt, n, q + "_" + label, got[label], prec});
        }
        if (cfg.experiment == ExperimentKind::CgRandomSystems)
            agg.push_back({name, std::nullopt, n, q + "_iqr", got["q75"] - got["q25"], prec});
    }
    // Reference curves.
    if (cfg.experiment == ExperimentKind::PolyGrowth)
        for (std::size_t n = 0; n <= *cfg.k; ++n)
            agg.push_back({name, std::nullopt, n, "limit", static_cast<double>(n + 1), "exact"});
    if (cfg.experiment == ExperimentKind::CgRandomSystems)
        for (std::size_t k = 1; k <= *cfg.k; ++k)
            agg.push_back({name, std::nullopt, k, "limit", cg_limit(*cfg.d, k), "exact"});
    rows.insert(rows.end(), agg.begin(), agg.end());
}

inline std::string iso_timestamp()
{
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

/** Aggregate rows grouped by quantity/precision into plot series. */
inline std::vector<Series> plot_series(const std::vector<ResultRow>& rows)
{
    std::map<std::string, Series> by;
    for (const auto& r : rows) {
        if (r.seed) continue;
        const std::string label = r.precision == "exact" ? r.quantity : r.quantity + " (" + r.precision + ")";
        auto& s = by[label];
        s.label = label;
        s.x.push_back(static_cast<double>(r.n_or_k));
        s.y.push_back(r.value);
    }
    std::vector<Series> out;
    for (auto& [_, s] : by)
        if (s.x.size() > 1) out.push_back(std::move(s));
    return out;
}

}  // namespace detail

/**
 * Runs all trials of cfg (resolved and validated) and returns rows. Trial t uses
 * seed cfg.seed + t; rows are ordered by trial regardless of the worker count.
 */
inline ExperimentResult run_experiment_rows(ExperimentConfig cfg)
{
    cfg.resolve();
    cfg.validate();
    ExperimentResult res;
    const auto start = std::chrono::steady_clock::now();
    const std::size_t trials = *cfg.trials;
    const std::string name(to_string(cfg.experiment));
    std::vector<std::vector<ResultRow>> per(trials);
    std::vector<std::vector<nlohmann::json>> reports(trials);
    std::vector<char> divergent(trials, 0);

    parallel_for(trials, resolve_threads(cfg.threads, trials), [&](std::size_t i) {
        detail::TrialContext t{cfg, cfg.seed + i, name, per[i], &reports[i]};
        try {
            switch (cfg.experiment) {
            case ExperimentKind::CoeffForwardError: detail::coeff_forward_error(t); break;
            case ExperimentKind::BackwardReconstruction: detail::backward_reconstruction(t); break;
            case ExperimentKind::PolyGrowth: detail::poly_growth(t); break;
            case ExperimentKind::MomentGaps: detail::moment_gaps(t); break;
            case ExperimentKind::CgRandomSystems: detail::cg_random_systems(t); break;
            case ExperimentKind::BoundAudit: detail::bound_audit(t); break;
            }
        } catch (const DivergentRun& e) {
            per[i].clear();
            reports[i].clear();
            t.add(e.step(), "divergent_run", static_cast<double>(e.step()), "");
            divergent[i] = 1;
        }
    });

    for (std::size_t i = 0; i < trials; ++i) {
        res.rows.insert(res.rows.end(), per[i].begin(), per[i].end());
        for (auto& j : reports[i]) res.reports.push_back(std::move(j));
        res.divergent_trials += divergent[i];
    }
    detail::aggregate(cfg, res.rows);
    res.quota_exceeded = static_cast<double>(res.divergent_trials) > cfg.divergent_quota * static_cast<double>(trials);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.config = std::move(cfg);
    return res;
}

/** Writes <out>/<experiment>.csv and .manifest.json, plus .svg when there are curves to plot. */
inline void write_outputs(const ExperimentResult& res)
{
    namespace fs = std::filesystem;
    const auto& cfg = res.config;
    const std::string name(to_string(cfg.experiment));
    fs::create_directories(cfg.out);
    const fs::path base = fs::path(cfg.out) / name;
    {
        std::ofstream os(base.string() + ".csv", std::ios::binary);
        write_rows_csv(os, res.rows);
        if (!os) throw std::runtime_error("cannot write " + base.string() + ".csv");
    }
    nlohmann::json m;
    m["config"] = cfg.to_json();
    m["version"] = LANCZOS_LAB_VERSION;
    m["started_at"] = detail::iso_timestamp();
    m["wall_seconds"] = res.wall_seconds;
    m["rows"] = res.rows.size();
    m["divergent_trials"] = res.divergent_trials;
    m["quota_exceeded"] = res.quota_exceeded;
    m["csv_header"] = kCsvHeader;
    m["files"] = {name + ".csv"};
    const auto series = cfg.svg ? detail::plot_series(res.rows) : std::vector<Series>{};
    if (!series.empty()) m["files"].push_back(name + ".svg");
    if (!res.reports.empty()) {
        m["files"].push_back(name + ".reports.json");
        std::ofstream rs(base.string() + ".reports.json");
        rs << nlohmann::json(res.reports).dump(2) << '\n';
    }
    std::ofstream ms(base.string() + ".manifest.json");
    ms << m.dump(2) << '\n';
    if (!series.empty()) {
        bool nonneg = true;
        for (const auto& s : series)
            for (double v : s.y) nonneg = nonneg && !(v < 0.0);
        std::ofstream ss(base.string() + ".svg");
        write_svg(ss, name, "n_or_k", series, nonneg);
    }
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    auto res = run_experiment_rows(cfg);
    write_outputs(res);
    return res;
}

}  // namespace lanczos_lab::harness
