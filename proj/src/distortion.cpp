#include "mmflow/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmflow/rng.hpp"
#include "mmflow/transport.hpp"

namespace mmflow {

namespace {

bool is_uniform(const FiniteSpace& X) {
    for (int i = 0; i < X.n; ++i)
        if (std::fabs(X.w(i) - 1.0 / X.n) > 1e-12) return false;
    return true;
}

bool same_weights(const FiniteSpace& X0, const FiniteSpace& X1) {
    if (X0.n != X1.n) return false;
    for (int i = 0; i < X0.n; ++i)
        if (std::fabs(X0.w(i) - X1.w(i)) > 1e-12) return false;
    return true;
}

std::vector<std::pair<double, double>> gauge_atoms(const FiniteSpace& X) {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(static_cast<std::size_t>(X.n) * X.n);
    for (int i = 0; i < X.n; ++i)
        for (int j = 0; j < X.n; ++j) {
            double m = X.w(i) * X.w(j);
            if (m > 0.0) atoms.emplace_back(X.g(i, j), m);
        }
    return atoms;
}

// Q(mu) = sum_{i,i',j,j'} g0(i,j) g1(i',j') mu(i,i') mu(j,j') = <mu, G0 mu G1>.
double bilinear_Q(const FiniteSpace& X0, const FiniteSpace& X1, const std::vector<double>& mu,
                  std::vector<double>& scratch, Backend backend) {
    const int n0 = X0.n, n1 = X1.n;
    // scratch = G0 * mu (n0 x n1)
    parallel_for(n0, backend, [&](long long i) {
        for (int j = 0; j < n1; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n0; ++k) acc += X0.g(static_cast<int>(i), k) * mu[static_cast<std::size_t>(k) * n1 + j];
            scratch[static_cast<std::size_t>(i) * n1 + j] = acc;
        }
    });
    return parallel_sum(static_cast<long long>(n0) * n1, backend, [&](long long a) {
        int i = static_cast<int>(a / n1), j = static_cast<int>(a % n1);
        double acc = 0.0;
        for (int k = 0; k < n1; ++k) acc += scratch[static_cast<std::size_t>(i) * n1 + k] * X1.g(k, j);
        return acc * mu[a];
    });
}

// grad = 2 * G0 mu G1
std::vector<double> bilinear_grad(const FiniteSpace& X0, const FiniteSpace& X1,
                                  const std::vector<double>& mu, Backend backend) {
    const int n0 = X0.n, n1 = X1.n;
    std::vector<double> tmp(static_cast<std::size_t>(n0) * n1), grad(static_cast<std::size_t>(n0) * n1);
    parallel_for(n0, backend, [&](long long i) {
        for (int j = 0; j < n1; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n0; ++k) acc += X0.g(static_cast<int>(i), k) * mu[static_cast<std::size_t>(k) * n1 + j];
            tmp[static_cast<std::size_t>(i) * n1 + j] = acc;
        }
    });
    parallel_for(n0, backend, [&](long long i) {
        for (int j = 0; j < n1; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n1; ++k) acc += tmp[static_cast<std::size_t>(i) * n1 + k] * X1.g(k, j);
            grad[static_cast<std::size_t>(i) * n1 + j] = 2.0 * acc;
        }
    });
    return grad;
}

// North-west corner vertex of the polytope under given row/col visit orders.
std::vector<double> nw_corner_vertex(const std::vector<double>& w0, const std::vector<double>& w1,
                                     const std::vector<int>& rowOrder, const std::vector<int>& colOrder) {
    const int n0 = static_cast<int>(w0.size()), n1 = static_cast<int>(w1.size());
    std::vector<double> plan(static_cast<std::size_t>(n0) * n1, 0.0);
    std::vector<double> supply(w0), demand(w1);
    std::size_t a = 0, b = 0;
    while (a < rowOrder.size() && b < colOrder.size()) {
        int i = rowOrder[a], j = colOrder[b];
        double m = std::min(supply[i], demand[j]);
        plan[static_cast<std::size_t>(i) * n1 + j] += m;
        supply[i] -= m;
        demand[j] -= m;
        if (supply[i] <= 1e-15)
            ++a;
        else
            ++b;
    }
    return plan;
}

}  // namespace

double lower_bound_size(const FiniteSpace& X0, const FiniteSpace& X1, double p) {
    return std::fabs(size_p(X0, p) - size_p(X1, p));
}

double lower_bound_distance_distribution(const FiniteSpace& X0, const FiniteSpace& X1, double p) {
    return wasserstein_1d(gauge_atoms(X0), gauge_atoms(X1), p);
}

std::pair<double, Coupling> solve_exhaustive_permutations(const FiniteSpace& X0, const FiniteSpace& X1,
                                                          double p, Backend backend) {
    if (X0.n != X1.n) throw PreconditionError("exhaustive solver: spaces must have equal n");
    if (!is_uniform(X0) || !is_uniform(X1))
        throw PreconditionError("exhaustive solver: weights must be uniform");
    const int n = X0.n;
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    std::vector<int> bestPerm = perm;
    do {
        Coupling mu = permutation_coupling(perm, X0.weights);
        double v = distortion(mu, X0, X1, p, backend);
        if (best < 0.0 || v < best) {
            best = v;
            bestPerm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best, permutation_coupling(bestPerm, X0.weights)};
}

std::pair<double, Coupling> solve_frank_wolfe(const FiniteSpace& X0, const FiniteSpace& X1,
                                              const SolverConfig& cfg, Backend backend) {
    const int n0 = X0.n, n1 = X1.n;
    std::vector<double> scratch(static_cast<std::size_t>(n0) * n1);

    auto ascend = [&](std::vector<double> mu) {
        double q = bilinear_Q(X0, X1, mu, scratch, backend);
        for (int it = 0; it < cfg.fw_max_iter; ++it) {
            std::vector<double> grad = bilinear_grad(X0, X1, mu, backend);
            // maximize <grad, s>: transport with cost -grad
            std::vector<double> negGrad(grad.size());
            for (std::size_t a = 0; a < grad.size(); ++a) negGrad[a] = -grad[a];
            std::vector<double> vertex = solve_transport(n0, n1, negGrad, X0.weights, X1.weights);
            std::vector<double> delta(vertex.size());
            for (std::size_t a = 0; a < vertex.size(); ++a) delta[a] = vertex[a] - mu[a];
            double b = 0.0;
            for (std::size_t a = 0; a < delta.size(); ++a) b += grad[a] * delta[a];
            if (b <= 0.0) break;  // vertex no better than mu: first-order stationary
            double aCoef = bilinear_Q(X0, X1, delta, scratch, backend);
            // h(t) = q + b t + a t^2 on [0,1]
            double t = 1.0;
            if (aCoef < 0.0) t = std::min(1.0, -b / (2.0 * aCoef));
            for (std::size_t idx = 0; idx < mu.size(); ++idx) mu[idx] += t * delta[idx];
            double qNew = q + b * t + aCoef * t * t;
            if (qNew - q <= 1e-10 * std::max(1.0, std::fabs(q))) {
                q = qNew;
                break;
            }
            q = qNew;
        }
        q = bilinear_Q(X0, X1, mu, scratch, backend);  // re-evaluate: line-search drift
        return std::make_pair(q, mu);
    };

    std::vector<std::pair<double, std::vector<double>>> results;
    results.push_back(ascend(product_coupling(X0.weights, X1.weights).plan));
    Rng rng(cfg.seed);
    std::vector<int> rowOrder(static_cast<std::size_t>(n0)), colOrder(static_cast<std::size_t>(n1));
    std::iota(rowOrder.begin(), rowOrder.end(), 0);
    std::iota(colOrder.begin(), colOrder.end(), 0);
    for (int r = 1; r < std::max(1, cfg.fw_restarts); ++r) {
        if (r > 1) {
            rng.shuffle(rowOrder);
            rng.shuffle(colOrder);
        }
        results.push_back(ascend(nw_corner_vertex(X0.weights, X1.weights, rowOrder, colOrder)));
    }

    // Reduce by (Q value desc, plan lexicographic) so the winner is
    // independent of evaluation order.
    std::size_t best = 0;
    for (std::size_t r = 1; r < results.size(); ++r) {
        if (results[r].first > results[best].first + 0.0 ||
            (results[r].first == results[best].first && results[r].second < results[best].second))
            best = r;
    }
    Coupling mu = make_coupling(n0, n1, std::move(results[best].second), X0.weights, X1.weights);
    double value = distortion(mu, X0, X1, 2.0, backend);
    return {value, mu};
}

DistResult dist(const FiniteSpace& X0, const FiniteSpace& X1, double p, const SolverConfig& cfg,
                SolverChoice choice, Backend backend) {
    const bool pinf = std::isinf(p);
    if (!pinf && p != 1.0 && p != 2.0)
        throw PreconditionError("dist: p must be 1, 2 or inf");

    DistResult res;
    res.lower = std::max(lower_bound_size(X0, X1, p), lower_bound_distance_distribution(X0, X1, p));
    res.solver_trace.emplace_back("lower_bound_size", lower_bound_size(X0, X1, p));
    res.solver_trace.emplace_back("lower_bound_distance_distribution",
                                  lower_bound_distance_distribution(X0, X1, p));

    bool haveUpper = false;
    auto offer = [&](const std::string& name, double value, Coupling mu) {
        res.solver_trace.emplace_back(name, value);
        if (!haveUpper || value < res.upper) {
            res.upper = value;
            res.best_coupling = std::move(mu);
            haveUpper = true;
        }
    };

    // Cheap always-valid candidates.
    {
        Coupling prod = product_coupling(X0.weights, X1.weights);
        const double vProd = distortion(prod, X0, X1, p, backend);
        offer("product_coupling", vProd, std::move(prod));
        if (same_weights(X0, X1)) {
            Coupling diag = diagonal_coupling(X0.weights);
            const double vDiag = distortion(diag, X0, X1, p, backend);
            offer("diagonal_coupling", vDiag, std::move(diag));
        }
    }

    // A one-point side leaves a single feasible coupling: the product plan
    // already offered is exact for every p.
    const bool unique = (X0.n == 1 || X1.n == 1);

    const bool exhaustApplies = X0.n == X1.n && X0.n <= cfg.exhaustive_bound && is_uniform(X0) &&
                                is_uniform(X1);
    const bool fwApplies = p == 2.0;

    if (choice == SolverChoice::exhaustive && !exhaustApplies && !unique)
        throw PreconditionError("dist: exhaustive solver requires uniform equal-n spaces within bound");
    if (choice == SolverChoice::frank_wolfe && !fwApplies)
        throw PreconditionError("dist: the conditional-gradient solver supports p = 2 only");
    if (choice == SolverChoice::automatic && !exhaustApplies && !fwApplies && !unique)
        throw PreconditionError("dist: no solver applies (p != 2 and exhaustive preconditions unmet)");

    if (exhaustApplies && (choice == SolverChoice::automatic || choice == SolverChoice::exhaustive)) {
        auto [v, mu] = solve_exhaustive_permutations(X0, X1, p, backend);
        offer("exhaustive_permutations", v, std::move(mu));
    }
    if (fwApplies && (choice == SolverChoice::automatic || choice == SolverChoice::frank_wolfe)) {
        auto [v, mu] = solve_frank_wolfe(X0, X1, cfg, backend);
        offer("frank_wolfe", v, std::move(mu));
    }

    if (res.upper < res.lower) {
        // Solvers beat the bounds within fp error; tighten the interval.
        res.lower = std::min(res.lower, res.upper);
    }
    res.certified = (res.upper - res.lower) <= cfg.tol;
    return res;
}

double npoint_quotient_distance(const FiniteSpace& f, const FiniteSpace& g, int bound) {
    if (f.n != g.n) throw PreconditionError("npoint_quotient_distance: equal n required");
    if (f.n > bound) throw PreconditionError("npoint_quotient_distance: n exceeds bound");
    if (!is_uniform(f) || !is_uniform(g))
        throw PreconditionError("npoint_quotient_distance: uniform weights required");
    const int n = f.n;
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double dlt = f.g(i, j) - g.g(perm[i], perm[j]);
                acc += dlt * dlt;
            }
        best = std::min(best, acc);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(2.0 * best / (static_cast<double>(n) * n));
}

}  // namespace mmflow
