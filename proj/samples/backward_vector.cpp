// Builds the nearby starting vector b* for a binary32 run and checks that exact
// Lanczos on (A, b*) reproduces the computed coefficients.
//
//   sample_backward_vector [n] [k] [seed]

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include <lanczos_lab/lanczos_lab.hpp>

using namespace lanczos_lab;

int main(int argc, char** argv)
{
    const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 500;
    const std::size_t k = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 20;
    const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

    auto problem = sample_goe(n, seed);
    LanczosOptions opts;
    opts.k = k;
    opts.precision = Precision::Low32;
    auto run = run_lanczos(problem, opts);

    auto E = dense_symmetric_eigen(problem.matrix);
    const Measure mu_N = vesd(E, problem.vector);
    auto h = build_h(run, mu_N);
    auto star = build_mu_star(h, mu_N);
    std::printf("Delta_k %.3e  P_k %.3f  sup|h| %.3e  moment match %.1e\n", h.delta_k, h.P_k, h.sup_norm_est,
                star.moment_match_error);
    try {
        auto bs = build_b_star(problem, h, E);
        auto be = verify_backward(problem, run, bs.vector);
        std::printf("||b - b*|| = %.3e  (max |h| on spectrum %.3e)\n", bs.distance, bs.h_sup_on_spectrum);
        std::printf("max |coef(A, b*) - computed coef| = %.3e\n", be.max());
    } catch (const std::domain_error& e) {
        std::printf("b* not available: %s\n", e.what());
        return 1;
    }
    return 0;
}
