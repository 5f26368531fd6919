#include "mmflow/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mmflow {

namespace {

constexpr double kPruneTol = 1e-15;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::PASS: return "PASS";
        case Verdict::FAIL: return "FAIL";
        case Verdict::INCONCLUSIVE: return "INCONCLUSIVE";
    }
    return "unknown";
}

GeodesicPoint geodesic_point(const FiniteSpace& X0, const FiniteSpace& X1, const Coupling& mu, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw PreconditionError("geodesic_point: t must lie in [0,1]");
    if (mu.rows != X0.n || mu.cols != X1.n) throw InputError("geodesic_point: coupling shape mismatch");
    GeodesicPoint gp;
    gp.t = t;
    gp.X0 = X0;
    gp.X1 = X1;
    gp.coupling = mu;
    for (int i = 0; i < X0.n; ++i)
        for (int j = 0; j < X1.n; ++j)
            if (mu.p(i, j) >= kPruneTol) gp.pairs.emplace_back(i, j);
    const int m = static_cast<int>(gp.pairs.size());
    std::vector<double> gauge(static_cast<std::size_t>(m) * m);
    std::vector<double> w(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
        auto [i, ip] = gp.pairs[a];
        w[a] = mu.p(i, ip);
        for (int b = 0; b < m; ++b) {
            auto [j, jp] = gp.pairs[b];
            gauge[static_cast<std::size_t>(a) * m + b] = (1.0 - t) * X0.g(i, j) + t * X1.g(ip, jp);
        }
    }
    gp.space = make_space(m, std::move(gauge), std::move(w));
    return gp;
}

Coupling endpoint_projection_coupling(const GeodesicPoint& gp, int endpoint) {
    if (endpoint != 0 && endpoint != 1) throw InputError("endpoint_projection_coupling: endpoint is 0 or 1");
    const int m = gp.space.n;
    const FiniteSpace& E = (endpoint == 0) ? gp.X0 : gp.X1;
    std::vector<double> plan(static_cast<std::size_t>(m) * E.n, 0.0);
    for (int a = 0; a < m; ++a) {
        int target = (endpoint == 0) ? gp.pairs[a].first : gp.pairs[a].second;
        plan[static_cast<std::size_t>(a) * E.n + target] = gp.space.w(a);
    }
    return make_coupling(m, E.n, std::move(plan), gp.space.weights, E.weights);
}

TangentVector make_tangent(int n, std::vector<double> g) {
    if (g.size() != static_cast<std::size_t>(n) * n) throw InputError("tangent: shape mismatch");
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double a = g[static_cast<std::size_t>(i) * n + j], b = g[static_cast<std::size_t>(j) * n + i];
            if (std::fabs(a - b) > 1e-12) throw InputError("tangent: asymmetric direction");
            double v = 0.5 * (a + b);
            g[static_cast<std::size_t>(i) * n + j] = v;
            g[static_cast<std::size_t>(j) * n + i] = v;
        }
        g[static_cast<std::size_t>(i) * n + i] = 0.0;
    }
    return TangentVector{n, std::move(g)};
}

TangentVector zero_tangent(int n) {
    return TangentVector{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
}

double tangent_norm(const TangentVector& v, const FiniteSpace& X) {
    if (v.n != X.n) throw InputError("tangent_norm: shape mismatch");
    double acc = 0.0;
    for (int i = 0; i < X.n; ++i)
        for (int j = 0; j < X.n; ++j) acc += v.at(i, j) * v.at(i, j) * X.w(i) * X.w(j);
    return std::sqrt(acc);
}

FiniteSpace exponential(const FiniteSpace& base, const TangentVector& v, double t) {
    if (v.n != base.n) throw InputError("exponential: tangent shape mismatch");
    std::vector<double> gauge(base.gauge);
    for (std::size_t a = 0; a < gauge.size(); ++a) gauge[a] += t * v.g[a];
    return make_space(base.n, std::move(gauge), base.weights, base.name, base.rationals);
}

SphereDistance sphere_distance(const FiniteSpace& X, const FiniteSpace& Xp, const SolverConfig& cfg) {
    if (std::fabs(size_p(X, 2.0) - 1.0) > 1e-9 || std::fabs(size_p(Xp, 2.0) - 1.0) > 1e-9)
        throw PreconditionError("sphere_distance: spaces must have unit size");
    DistResult d = dist(X, Xp, 2.0, cfg);
    SphereDistance s;
    s.lower = 2.0 * std::asin(clamp01(0.5 * d.lower));
    s.upper = 2.0 * std::asin(clamp01(0.5 * d.upper));
    s.certified = d.certified;
    return s;
}

SpeedReport geodesic_speed_report(const FiniteSpace& X0, const FiniteSpace& X1, const Coupling& mu,
                                  const std::vector<double>& grid, const SolverConfig& cfg, double tol) {
    SpeedReport rep;
    DistResult d01 = dist(X0, X1, 2.0, cfg);
    rep.endpointLower = d01.lower;
    rep.endpointUpper = d01.upper;
    const double disMu = distortion(mu, X0, X1, 2.0);
    bool conclusive = d01.certified;

    for (std::size_t a = 0; a < grid.size(); ++a) {
        for (std::size_t b = a + 1; b < grid.size(); ++b) {
            double s = grid[a], t = grid[b];
            if (s > t) std::swap(s, t);
            SpeedReport::Entry e;
            e.s = s;
            e.t = t;
            // Identity coupling on the retained pairs: the two gauges differ
            // by (t-s)*(g1-g0), so its distortion is (t-s)*dis(mu).
            e.upper = (t - s) * disMu;
            e.lower = std::max(0.0, d01.lower - s * d01.upper - (1.0 - t) * d01.upper);
            e.expected = (t - s) * 0.5 * (d01.lower + d01.upper);
            rep.maxDeviation = std::max(rep.maxDeviation,
                                        std::max(e.upper - e.expected, e.expected - e.lower));
            rep.entries.push_back(e);
        }
    }
    rep.verdict = !conclusive ? Verdict::INCONCLUSIVE
                              : (rep.maxDeviation <= tol ? Verdict::PASS : Verdict::FAIL);
    return rep;
}

ComparisonReport check_triangle_comparison(const FiniteSpace& X0, const FiniteSpace& X1,
                                           const Coupling& mu, const FiniteSpace& Xp,
                                           const std::vector<double>& grid, const SolverConfig& cfg,
                                           double tol) {
    ComparisonReport rep;
    rep.grid = grid;
    rep.tol = tol;
    DistResult d01 = dist(X0, X1, 2.0, cfg);
    DistResult d0p = dist(X0, Xp, 2.0, cfg);
    DistResult d1p = dist(X1, Xp, 2.0, cfg);
    bool all = true;
    bool fail = false;
    for (double t : grid) {
        GeodesicPoint gp = geodesic_point(X0, X1, mu, t);
        DistResult dtp = dist(gp.space, Xp, 2.0, cfg);
        bool conclusive = d01.certified && d0p.certified && d1p.certified && dtp.certified;
        double slack = dtp.upper * dtp.upper -
                       ((1.0 - t) * d0p.upper * d0p.upper + t * d1p.upper * d1p.upper -
                        t * (1.0 - t) * d01.upper * d01.upper);
        rep.slack.push_back(slack);
        rep.conclusive.push_back(conclusive);
        if (!conclusive) all = false;
        if (conclusive && slack < -tol) fail = true;
    }
    rep.verdict = fail ? Verdict::FAIL : (all ? Verdict::PASS : Verdict::INCONCLUSIVE);
    return rep;
}

QuadrupleReport check_quadruple(const FiniteSpace& X0, const FiniteSpace& X1, const FiniteSpace& X2,
                                const FiniteSpace& X3, const SolverConfig& cfg, double tol) {
    QuadrupleReport rep;
    rep.tol = tol;
    const FiniteSpace* xs[4] = {&X0, &X1, &X2, &X3};
    double d[4][4] = {};
    bool conclusive = true;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            DistResult r = dist(*xs[i], *xs[j], 2.0, cfg);
            if (!r.certified) conclusive = false;
            d[i][j] = d[j][i] = r.upper;
            rep.distances.emplace_back("D(X" + std::to_string(i) + ",X" + std::to_string(j) + ")",
                                       r.upper);
        }
    double lhs = 0.0, rhs = 0.0;
    for (int i = 1; i < 4; ++i) lhs += d[0][i] * d[0][i];
    for (int i = 1; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) rhs += d[i][j] * d[i][j];
    rep.slack = lhs - rhs / 3.0;
    rep.conclusive = conclusive;
    rep.verdict = !conclusive ? Verdict::INCONCLUSIVE
                              : (rep.slack >= -tol ? Verdict::PASS : Verdict::FAIL);
    return rep;
}

}  // namespace mmflow
