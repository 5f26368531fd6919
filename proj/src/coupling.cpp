#include "mmflow/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmflow {

namespace {

constexpr double kMarginalTol = 1e-10;
constexpr double kSupportTol = 1e-15;

void check_marginals(const Coupling& mu) {
    for (int i = 0; i < mu.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < mu.cols; ++j) {
            double v = mu.p(i, j);
            if (!(v >= 0.0)) throw InputError("coupling: negative or non-finite entry");
            s += v;
        }
        if (std::fabs(s - mu.w0[i]) > kMarginalTol)
            throw InputError("coupling: row sum " + std::to_string(i) + " mismatches marginal");
    }
    for (int j = 0; j < mu.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < mu.rows; ++i) s += mu.p(i, j);
        if (std::fabs(s - mu.w1[j]) > kMarginalTol)
            throw InputError("coupling: column sum " + std::to_string(j) + " mismatches marginal");
    }
}

}  // namespace

Coupling make_coupling(int rows, int cols, std::vector<double> plan, std::vector<double> w0,
                       std::vector<double> w1) {
    if (rows < 1 || cols < 1) throw InputError("coupling: empty shape");
    if (static_cast<long long>(rows) * cols > 1000000)
        throw PreconditionError("coupling: dense size guard exceeded (rows*cols > 1e6)");
    if (plan.size() != static_cast<std::size_t>(rows) * cols || w0.size() != static_cast<std::size_t>(rows) ||
        w1.size() != static_cast<std::size_t>(cols))
        throw InputError("coupling: shape mismatch");
    Coupling mu;
    mu.rows = rows;
    mu.cols = cols;
    mu.plan = std::move(plan);
    mu.w0 = std::move(w0);
    mu.w1 = std::move(w1);
    check_marginals(mu);
    return mu;
}

Coupling product_coupling(const std::vector<double>& w0, const std::vector<double>& w1) {
    int n0 = static_cast<int>(w0.size()), n1 = static_cast<int>(w1.size());
    std::vector<double> plan(static_cast<std::size_t>(n0) * n1);
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) plan[static_cast<std::size_t>(i) * n1 + j] = w0[i] * w1[j];
    return make_coupling(n0, n1, std::move(plan), w0, w1);
}

Coupling diagonal_coupling(const std::vector<double>& w) {
    int n = static_cast<int>(w.size());
    std::vector<double> plan(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) plan[static_cast<std::size_t>(i) * n + i] = w[i];
    return make_coupling(n, n, std::move(plan), w, w);
}

Coupling permutation_coupling(const std::vector<int>& sigma, const std::vector<double>& w) {
    int n = static_cast<int>(w.size());
    if (static_cast<int>(sigma.size()) != n) throw InputError("permutation_coupling: size mismatch");
    for (double v : w)
        if (std::fabs(v - 1.0 / n) > kMarginalTol)
            throw PreconditionError("permutation_coupling: weights must be uniform");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int s : sigma) {
        if (s < 0 || s >= n || seen[s]) throw InputError("permutation_coupling: not a permutation");
        seen[s] = 1;
    }
    std::vector<double> plan(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) plan[static_cast<std::size_t>(i) * n + sigma[i]] = 1.0 / n;
    return make_coupling(n, n, std::move(plan), w, w);
}

Coupling transpose(const Coupling& mu) {
    std::vector<double> plan(static_cast<std::size_t>(mu.cols) * mu.rows);
    for (int i = 0; i < mu.rows; ++i)
        for (int j = 0; j < mu.cols; ++j) plan[static_cast<std::size_t>(j) * mu.rows + i] = mu.p(i, j);
    return make_coupling(mu.cols, mu.rows, std::move(plan), mu.w1, mu.w0);
}

GluedTensor glue(const Coupling& mu1, const Coupling& mu2) {
    if (mu1.cols != mu2.rows) throw InputError("glue: middle dimension mismatch");
    for (int j = 0; j < mu1.cols; ++j)
        if (std::fabs(mu1.w1[j] - mu2.w0[j]) > kMarginalTol)
            throw InputError("glue: middle marginals disagree");
    GluedTensor T;
    T.n0 = mu1.rows;
    T.n1 = mu1.cols;
    T.n2 = mu2.cols;
    T.t.assign(static_cast<std::size_t>(T.n0) * T.n1 * T.n2, 0.0);
    for (int j = 0; j < T.n1; ++j) {
        double wj = mu1.w1[j];
        if (wj <= 0.0) continue;  // zero-mass middle slice stays 0
        for (int i = 0; i < T.n0; ++i) {
            double a = mu1.p(i, j);
            if (a == 0.0) continue;
            for (int k = 0; k < T.n2; ++k)
                T.t[(static_cast<std::size_t>(i) * T.n1 + j) * T.n2 + k] = a * mu2.p(j, k) / wj;
        }
    }
    return T;
}

Coupling melt(const Coupling& mu1, const Coupling& mu2) {
    GluedTensor T = glue(mu1, mu2);
    std::vector<double> plan(static_cast<std::size_t>(T.n0) * T.n2, 0.0);
    for (int i = 0; i < T.n0; ++i)
        for (int j = 0; j < T.n1; ++j)
            for (int k = 0; k < T.n2; ++k)
                plan[static_cast<std::size_t>(i) * T.n2 + k] += T.at(i, j, k);
    return make_coupling(T.n0, T.n2, std::move(plan), mu1.w0, mu2.w1);
}

double distortion(const Coupling& mu, const FiniteSpace& X0, const FiniteSpace& X1, double p,
                  Backend backend) {
    if (mu.rows != X0.n || mu.cols != X1.n) throw InputError("distortion: coupling shape mismatch");
    const int n1 = mu.cols;
    const long long m = static_cast<long long>(mu.rows) * mu.cols;
    if (std::isinf(p)) {
        double best = 0.0;
        for (long long a = 0; a < m; ++a) {
            if (mu.plan[a] <= kSupportTol) continue;
            int i = static_cast<int>(a / n1), ip = static_cast<int>(a % n1);
            for (long long b = 0; b < m; ++b) {
                if (mu.plan[b] <= kSupportTol) continue;
                int j = static_cast<int>(b / n1), jp = static_cast<int>(b % n1);
                best = std::max(best, std::fabs(X0.g(i, j) - X1.g(ip, jp)));
            }
        }
        return best;
    }
    if (!(p >= 1.0)) throw PreconditionError("distortion: p must be >= 1 or inf");
    double acc = parallel_sum(m, backend, [&](long long a) {
        double ma = mu.plan[a];
        if (ma == 0.0) return 0.0;
        int i = static_cast<int>(a / n1), ip = static_cast<int>(a % n1);
        double row = 0.0;
        for (long long b = 0; b < m; ++b) {
            double mb = mu.plan[b];
            if (mb == 0.0) continue;
            int j = static_cast<int>(b / n1), jp = static_cast<int>(b % n1);
            double v = std::fabs(X0.g(i, j) - X1.g(ip, jp));
            row += (p == 2.0 ? v * v : (p == 1.0 ? v : std::pow(v, p))) * mb;
        }
        return row * ma;
    });
    acc = std::max(acc, 0.0);
    return (p == 2.0) ? std::sqrt(acc) : (p == 1.0 ? acc : std::pow(acc, 1.0 / p));
}

double coupling_norm(const Coupling& mu, const FiniteSpace& X, Backend backend) {
    if (mu.rows != X.n || mu.cols != X.n) throw InputError("coupling_norm: not a self-coupling of X");
    for (int i = 0; i < X.n; ++i)
        if (std::fabs(mu.w0[i] - X.w(i)) > kMarginalTol || std::fabs(mu.w1[i] - X.w(i)) > kMarginalTol)
            throw InputError("coupling_norm: marginals mismatch the space weights");
    return distortion(mu, X, X, 2.0, backend);
}

SymmetryGroup symmetry_group(const FiniteSpace& X, int bound) {
    if (X.n > bound)
        throw PreconditionError("symmetry_group: n exceeds exhaustive bound " + std::to_string(bound));
    SymmetryGroup G;
    G.n = X.n;
    std::vector<int> perm(static_cast<std::size_t>(X.n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        bool ok = true;
        for (int i = 0; i < X.n && ok; ++i) {
            if (std::fabs(X.w(perm[i]) - X.w(i)) > kMarginalTol) ok = false;
            for (int j = 0; j < X.n && ok; ++j)
                if (std::fabs(X.g(perm[i], perm[j]) - X.g(i, j)) > 1e-12) ok = false;
        }
        if (ok) G.elements.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return G;
}

}  // namespace mmflow
