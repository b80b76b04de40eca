// Binary32 Lanczos on a GOE matrix against a double-double reorthogonalized run.
//
//   sample_forward_error [n] [k] [seed]

#include <cstdio>
#include <cstdlib>

#include <lanczos_lab/lanczos_lab.hpp>

using namespace lanczos_lab;

int main(int argc, char** argv)
{
    const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 500;
    const std::size_t k = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 30;
    const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

    auto problem = sample_goe(n, seed);
    LanczosOptions opts;
    opts.k = k;
    opts.precision = Precision::Low32;
    auto low = run_lanczos(problem, opts);
    auto exact = run_exact_lanczos(problem, k);
    auto err = coefficient_errors(low.T, exact.T);
    auto diag = measure_diagnostics(problem, low);

    std::printf("GOE n=%zu k=%zu seed=%llu\n", n, k, static_cast<unsigned long long>(seed));
    std::printf("%4s %14s %14s %12s %12s\n", "n", "alpha", "beta", "|da|", "|db|");
    for (std::size_t i = 0; i < low.T.size(); ++i) {
        const double b = i < low.T.betas.size() ? low.T.betas[i].hi : 0.0;
        const double db = i < err.beta.size() ? err.beta[i] : 0.0;
        std::printf("%4zu %14.8f %14.8f %12.3e %12.3e\n", i, low.T.alphas[i].hi, b, err.alpha[i], db);
    }
    std::printf("max coefficient error %.3e, eps_lan %.3e\n", err.max(), diag.eps_lan);
    return 0;
}
