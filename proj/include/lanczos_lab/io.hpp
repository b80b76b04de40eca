#pragma once

// CSV and JSON serialization. JSON output needs nlohmann/json on the include path.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <system_error>
#include <variant>

#include <json.hpp>

#include "krylov.hpp"
#include "measures.hpp"
#include "orthopoly.hpp"
#include "spectral.hpp"
#include "stability.hpp"

namespace lanczos_lab::io {

/** Shortest round-trip decimal, independent of the global locale. */
inline std::string fmt(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

/** Double-double as the decimal of its rounded sum; full value lives in hi and lo. */
inline std::string fmt(const Ext& x) { return fmt(x.hi + x.lo); }

inline void write_measure_csv(std::ostream& os, const Measure& m)
{
    if (m.kind() == MeasureKind::Discrete) {
        const auto& d = m.as_discrete();
        os << "position,weight\n";
        for (std::size_t i = 0; i < d.atoms.size(); ++i) os << fmt(d.atoms[i]) << ',' << fmt(d.weights[i]) << '\n';
        return;
    }
    os << "kind,param,value\n";
    const std::string kind(to_string(m.kind()));
    std::visit(
        [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Measure::Semicircle> || std::is_same_v<V, Measure::Arcsine>) {
                os << kind << ",a," << fmt(v.a) << '\n' << kind << ",b," << fmt(v.b) << '\n';
            } else if constexpr (std::is_same_v<V, Measure::MarchenkoPastur>) {
                os << kind << ",d," << fmt(v.d) << '\n';
            } else if constexpr (std::is_same_v<V, Measure::Perturbed>) {
                os << kind << ",base," << to_string(v.base->kind()) << '\n';
                for (std::size_t n = 0; n < v.h.coeffs.size(); ++n)
                    os << kind << ",h" << n << ',' << fmt(v.h.coeffs[n]) << '\n';
            }
        },
        m.data());
}

inline void write_jacobi_csv(std::ostream& os, const JacobiMatrix& J)
{
    os << "n,alpha,beta\n";
    for (std::size_t n = 0; n < J.size(); ++n)
        os << n << ',' << fmt(J.alphas[n]) << ',' << (n < J.betas.size() ? fmt(J.betas[n]) : std::string()) << '\n';
}

inline void write_moments_csv(std::ostream& os, const ModifiedMoments& m)
{
    os << "n,m_n\n";
    for (std::size_t n = 0; n < m.values.size(); ++n) os << n << ',' << fmt(m.values[n]) << '\n';
}

inline void write_trace_csv(std::ostream& os, const SolveTrace& t, bool header = true)
{
    if (header) os << "k,error,limit,precision,seed\n";
    for (std::size_t i = 0; i < t.curve_length(); ++i)
        os << t.ks[i] << ',' << fmt(t.errors[i]) << ',' << fmt(t.limit_curve[i]) << ',' << to_string(t.precision)
           << ',' << t.seed << '\n';
}

inline nlohmann::json to_json(const StabilityReport& r)
{
    nlohmann::json j;
    j["k"] = r.k;
    j["precision"] = std::string(to_string(r.precision));
    j["reference"] = r.reference_kind;
    j["interval"] = {r.a, r.b};
    j["A_norm"] = r.A_norm;
    j["eps_lan"] = r.eps_lan;
    j["sigma"] = r.sigma;
    j["constants"] = {{"C", r.C}, {"D", r.D}};
    j["P_k"] = r.P_k;
    j["moment_gaps"] = {{"mubar_mu", r.gap_mubar_mu},
                        {"mustar_muN", r.gap_star_N},
                        {"muN_mu", r.gap_N_mu},
                        {"mubar_muN", r.gap_mubar_N}};
    j["moment_match_error"] = r.moment_match_error;
    j["mu_star_signed"] = r.mu_star_signed;
    j["h_sup_grid"] = r.h_sup_grid;
    j["h_sup_on_spectrum"] = r.h_sup_on_spectrum;
    j["b_star_distance"] = r.b_star_distance ? nlohmann::json(*r.b_star_distance) : nlohmann::json();
    nlohmann::json b;
    b["thm_a"] = {{"lhs", r.gap_star_N}, {"rhs", r.thm_a_rhs}, {"holds", r.thm_a_holds}};
    b["thm_b"] = {{"lhs", r.h_sup_grid}, {"rhs", r.thm_b_rhs}, {"holds", r.thm_b_holds}};
    b["h_bd"] = {{"lhs", r.h_sup_grid}, {"rhs", r.h_bd_rhs}, {"holds", r.h_bd_holds}};
    if (r.b_star_rhs)
        b["b_star"] = {{"lhs", *r.b_star_distance}, {"rhs", *r.b_star_rhs}, {"holds", *r.b_star_holds},
                       {"remark_holds", *r.b_star_remark_holds}};
    if (r.cheb)
        b["cheb_moments"] = {{"eps_hat", r.cheb->eps_hat},
                             {"preconditions_hold", r.cheb->preconditions_hold},
                             {"moment_violations", r.cheb->moment_violations},
                             {"vector_violations", r.cheb->vector_violations}};
    if (r.triangle_holds)
        b["triangle"] = {{"lhs", *r.triangle_lhs}, {"rhs", *r.triangle_rhs}, {"holds", *r.triangle_holds}};
    j["bounds"] = b;
    j["preconditions"] = {{"eps", r.precondition_eps}, {"support", r.precondition_support}};
    j["flags"] = {{"h_exceeds_one", r.h_exceeds_one}, {"bounds_satisfied", r.bounds_satisfied}};
    return j;
}

/** Per-n forward and backward coefficient errors. */
inline void write_report_errors_csv(std::ostream& os, const StabilityReport& r)
{
    os << "n,forward_alpha,forward_beta,backward_alpha,backward_beta\n";
    auto cell = [](const std::vector<double>& v, std::size_t n) { return n < v.size() ? fmt(v[n]) : std::string(); };
    for (std::size_t n = 0; n < r.k; ++n)
        os << n << ',' << cell(r.forward_alpha, n) << ',' << cell(r.forward_beta, n) << ','
           << cell(r.backward_alpha, n) << ',' << cell(r.backward_beta, n) << '\n';
}

/** Per-n Chebyshev moment audit rows. */
inline void write_cheb_audit_csv(std::ostream& os, const ChebMomentAudit& a)
{
    os << "n,moment_gap,moment_bound\n";
    for (const auto& row : a.moments) os << row.n << ',' << fmt(row.lhs) << ',' << fmt(row.rhs) << '\n';
}

}  // namespace lanczos_lab::io
