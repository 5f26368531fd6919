#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mmflow/distortion.hpp"
#include "mmflow/functionals.hpp"
#include "mmflow/growthflow.hpp"
#include "mmflow/parallel.hpp"
#include "mmflow/rng.hpp"
#include "mmflow/space.hpp"

namespace {

using Clock = std::chrono::steady_clock;

mmflow::FiniteSpace random_space(int n, std::uint64_t seed) {
    mmflow::Rng rng(seed);
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = rng.uniform(0.5, 1.5);
            g[static_cast<std::size_t>(i) * n + j] = v;
            g[static_cast<std::size_t>(j) * n + i] = v;
        }
    return mmflow::make_space(n, g, std::vector<double>(n, 1.0 / n));
}

struct Row {
    std::string name;
    int n;
    double serial_ms;
    double parallel_ms;
    double diff;
};

template <typename Fn>
double time_ms(Fn&& fn, int reps, double& out) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        out = fn();
        const auto t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void print_row(const Row& r) {
    std::printf("%-22s n=%-4d serial %9.2f ms  parallel %9.2f ms  speedup %5.2fx  |diff| %.3e\n",
                r.name.c_str(), r.n, r.serial_ms, r.parallel_ms,
                r.parallel_ms > 0 ? r.serial_ms / r.parallel_ms : 0.0, r.diff);
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--quick") quick = true;

    const int reps = quick ? 1 : 3;
    std::printf("workers: %d\n", mmflow::worker_count());

    {
        const int n = quick ? 24 : 48;
        const auto A = random_space(n, 11);
        const auto B = random_space(n, 12);
        mmflow::SolverConfig cfg;
        cfg.fw_restarts = quick ? 4 : 8;
        double vs = 0.0, vp = 0.0;
        const double ts = time_ms(
            [&] { return mmflow::solve_frank_wolfe(A, B, cfg, mmflow::Backend::serial).first; }, reps, vs);
        const double tp = time_ms(
            [&] { return mmflow::solve_frank_wolfe(A, B, cfg, mmflow::Backend::parallel).first; }, reps, vp);
        print_row({"frank_wolfe", n, ts, tp, std::fabs(vs - vp)});
    }

    {
        const int n = quick ? 40 : 90;
        const auto X = random_space(n, 21);
        const auto spec = mmflow::make_G_spec(0.0);
        double vs = 0.0, vp = 0.0;
        const double ts = time_ms(
            [&] { return mmflow::eval_polynomial(spec, X, std::nullopt, mmflow::Backend::serial).value; }, reps, vs);
        const double tp = time_ms(
            [&] { return mmflow::eval_polynomial(spec, X, std::nullopt, mmflow::Backend::parallel).value; }, reps, vp);
        print_row({"eval_G0_exact", n, ts, tp, std::fabs(vs - vp)});
    }

    {
        const int n = quick ? 40 : 80;
        const auto X = random_space(n, 31);
        double vs = 0.0, vp = 0.0;
        const double ts = time_ms(
            [&] {
                const auto g = mmflow::gradient_G0(X, mmflow::Backend::serial);
                return mmflow::tangent_norm(g, X);
            },
            reps, vs);
        const double tp = time_ms(
            [&] {
                const auto g = mmflow::gradient_G0(X, mmflow::Backend::parallel);
                return mmflow::tangent_norm(g, X);
            },
            reps, vp);
        print_row({"gradient_G0", n, ts, tp, std::fabs(vs - vp)});
    }

    {
        const int n = quick ? 60 : 160;
        const auto X = random_space(n, 41);
        const auto model = mmflow::model_profile_constant_curvature(1, 1.0);
        const auto rho = mmflow::make_exponential_weight(1.0);
        double vs = 0.0, vp = 0.0;
        const double ts = time_ms(
            [&] {
                const auto g = mmflow::grad_minus_F(X, model, rho, mmflow::Backend::serial);
                return mmflow::tangent_norm(g, X);
            },
            reps, vs);
        const double tp = time_ms(
            [&] {
                const auto g = mmflow::grad_minus_F(X, model, rho, mmflow::Backend::parallel);
                return mmflow::tangent_norm(g, X);
            },
            reps, vp);
        print_row({"grad_minus_F", n, ts, tp, std::fabs(vs - vp)});
    }

    return 0;
}
