#include "mmflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmflow/space.hpp"

namespace mmflow {

namespace {

constexpr double kMassEps = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> solve_transport(int n0, int n1, const std::vector<double>& cost,
                                    const std::vector<double>& w0, const std::vector<double>& w1) {
    if (cost.size() != static_cast<std::size_t>(n0) * n1 || w0.size() != static_cast<std::size_t>(n0) ||
        w1.size() != static_cast<std::size_t>(n1))
        throw InputError("solve_transport: shape mismatch");

    // Shift costs to be nonnegative; a constant shift moves the objective by
    // shift * total mass and leaves the argmin unchanged.
    double cmin = 0.0;
    for (double v : cost) {
        if (!std::isfinite(v)) throw InputError("solve_transport: non-finite cost");
        cmin = std::min(cmin, v);
    }
    std::vector<double> c(cost);
    if (cmin < 0.0)
        for (double& v : c) v -= cmin;

    std::vector<double> supply(w0), demand(w1);
    std::vector<double> plan(static_cast<std::size_t>(n0) * n1, 0.0);

    // Nodes: rows [0,n0), cols [n0,n0+n1). Residual edges: i->j cost c_ij,
    // j->i cost -c_ij when plan[i][j] > 0. pot keeps all reduced costs
    // w(u,v) + pot[u] - pot[v] nonnegative (successive shortest paths).
    const int N = n0 + n1;
    std::vector<double> pot(static_cast<std::size_t>(N), 0.0);
    std::vector<double> dist(static_cast<std::size_t>(N));
    std::vector<int> parent(static_cast<std::size_t>(N));
    std::vector<char> done(static_cast<std::size_t>(N));

    for (;;) {
        double supplyLeft = 0.0;
        for (double v : supply) supplyLeft = std::max(supplyLeft, v);
        if (supplyLeft <= kMassEps) break;

        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (int i = 0; i < n0; ++i)
            if (supply[i] > kMassEps) dist[i] = 0.0;

        int target = -1;
        for (;;) {
            int u = -1;
            double best = kInf;
            for (int v = 0; v < N; ++v)
                if (!done[v] && dist[v] < best) {
                    best = dist[v];
                    u = v;
                }
            if (u < 0) break;
            done[u] = 1;
            if (u >= n0 && demand[u - n0] > kMassEps) {
                target = u;
                break;
            }
            if (u < n0) {
                for (int j = 0; j < n1; ++j) {
                    int v = n0 + j;
                    if (done[v]) continue;
                    double rc = c[static_cast<std::size_t>(u) * n1 + j] + pot[u] - pot[v];
                    if (rc < 0.0) rc = 0.0;  // guard fp drift
                    if (dist[u] + rc < dist[v]) {
                        dist[v] = dist[u] + rc;
                        parent[v] = u;
                    }
                }
            } else {
                int j = u - n0;
                for (int i = 0; i < n0; ++i) {
                    if (done[i] || plan[static_cast<std::size_t>(i) * n1 + j] <= kMassEps) continue;
                    double rc = -c[static_cast<std::size_t>(i) * n1 + j] + pot[u] - pot[i];
                    if (rc < 0.0) rc = 0.0;
                    if (dist[u] + rc < dist[i]) {
                        dist[i] = dist[u] + rc;
                        parent[i] = u;
                    }
                }
            }
        }
        if (target < 0) {
            if (supplyLeft < 1e-12) break;  // residual dust only
            throw PreconditionError("solve_transport: marginals are not balanced");
        }

        const double dstar = dist[target];
        for (int v = 0; v < N; ++v) pot[v] += std::min(dist[v], dstar);

        int root = target;
        while (parent[root] >= 0) root = parent[root];
        double amount = std::min(supply[root], demand[target - n0]);
        for (int v = target; parent[v] >= 0; v = parent[v]) {
            int u = parent[v];
            if (u >= n0)  // backward edge: col u feeds row v, plan[v][u-n0] shrinks
                amount = std::min(amount, plan[static_cast<std::size_t>(v) * n1 + (u - n0)]);
        }
        for (int v = target; parent[v] >= 0; v = parent[v]) {
            int u = parent[v];
            if (u < n0)
                plan[static_cast<std::size_t>(u) * n1 + (v - n0)] += amount;
            else
                plan[static_cast<std::size_t>(v) * n1 + (u - n0)] -= amount;
        }
        supply[root] -= amount;
        demand[target - n0] -= amount;
        if (supply[root] < kMassEps) supply[root] = 0.0;
        if (demand[target - n0] < kMassEps) demand[target - n0] = 0.0;
    }
    return plan;
}

double wasserstein_1d(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b,
                      double p) {
    auto byValue = [](const std::pair<double, double>& x, const std::pair<double, double>& y) {
        return x.first < y.first;
    };
    std::sort(a.begin(), a.end(), byValue);
    std::sort(b.begin(), b.end(), byValue);
    std::size_t i = 0, j = 0;
    double ra = (a.empty() ? 0.0 : a[0].second), rb = (b.empty() ? 0.0 : b[0].second);
    double acc = 0.0, worst = 0.0;
    const bool inf = std::isinf(p);
    while (i < a.size() && j < b.size()) {
        double m = std::min(ra, rb);
        double v = std::fabs(a[i].first - b[j].first);
        if (m > kMassEps) {
            if (inf)
                worst = std::max(worst, v);
            else
                acc += (p == 2.0 ? v * v : (p == 1.0 ? v : std::pow(v, p))) * m;
        }
        ra -= m;
        rb -= m;
        if (ra <= kMassEps) {
            ++i;
            ra = (i < a.size()) ? a[i].second : 0.0;
        }
        if (rb <= kMassEps) {
            ++j;
            rb = (j < b.size()) ? b[j].second : 0.0;
        }
    }
    if (inf) return worst;
    acc = std::max(acc, 0.0);
    return (p == 2.0) ? std::sqrt(acc) : (p == 1.0 ? acc : std::pow(acc, 1.0 / p));
}

}  // namespace mmflow
