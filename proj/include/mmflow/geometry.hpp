#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mmflow/coupling.hpp"
#include "mmflow/distortion.hpp"
#include "mmflow/space.hpp"

namespace mmflow {

enum class Verdict { PASS, FAIL, INCONCLUSIVE };

const char* to_string(Verdict v);

// Point on the geodesic between X0 and X1 induced by a coupling: the product
// space carries weights = plan entries and gauge (1-t)*g0 + t*g1. Pairs with
// plan mass < 1e-15 are pruned; `pairs` records the surviving (i,j).
struct GeodesicPoint {
    double t = 0.0;
    FiniteSpace space;
    std::vector<std::pair<int, int>> pairs;
    FiniteSpace X0, X1;
    Coupling coupling;
};

GeodesicPoint geodesic_point(const FiniteSpace& X0, const FiniteSpace& X1, const Coupling& mu, double t);

// Coupling between a geodesic point and its endpoint (0 or 1) that projects
// each retained product pair onto that factor.
Coupling endpoint_projection_coupling(const GeodesicPoint& gp, int endpoint);

// Direction of gauge perturbation at a base space.
struct TangentVector {
    int n = 0;
    std::vector<double> g;  // row-major n*n, symmetric, zero diagonal
    double at(int i, int j) const { return g[static_cast<std::size_t>(i) * n + j]; }
};

TangentVector make_tangent(int n, std::vector<double> g);
TangentVector zero_tangent(int n);

// L2(m x m) norm of a tangent vector at X.
double tangent_norm(const TangentVector& v, const FiniteSpace& X);

// gauge + t*v.g, weights unchanged.
FiniteSpace exponential(const FiniteSpace& base, const TangentVector& v, double t);

// Angular distance on the unit sphere of spaces: 2*arcsin(D/2) as an interval.
struct SphereDistance {
    double lower = 0.0;
    double upper = 0.0;
    bool certified = false;
};

SphereDistance sphere_distance(const FiniteSpace& X, const FiniteSpace& Xp, const SolverConfig& cfg);

// Constant-speed certificate along the geodesic induced by mu: for grid
// points s < t, an upper bound from the identity coupling on the retained
// pairs and a lower bound by chaining through the endpoints.
struct SpeedReport {
    Verdict verdict = Verdict::INCONCLUSIVE;
    double endpointLower = 0.0, endpointUpper = 0.0;
    struct Entry {
        double s = 0.0, t = 0.0;
        double lower = 0.0, upper = 0.0, expected = 0.0;
    };
    std::vector<Entry> entries;
    double maxDeviation = 0.0;
};

SpeedReport geodesic_speed_report(const FiniteSpace& X0, const FiniteSpace& X1, const Coupling& mu,
                                  const std::vector<double>& grid, const SolverConfig& cfg,
                                  double tol = 1e-6);

// D^2(X_t, Xp) >= (1-t) D^2(X0,Xp) + t D^2(X1,Xp) - t(1-t) D^2(X0,X1) on the
// grid; INCONCLUSIVE when any required distance is uncertified.
struct ComparisonReport {
    Verdict verdict = Verdict::INCONCLUSIVE;
    std::vector<double> grid;
    std::vector<double> slack;
    std::vector<bool> conclusive;
    double tol = 1e-8;
};

ComparisonReport check_triangle_comparison(const FiniteSpace& X0, const FiniteSpace& X1,
                                           const Coupling& mu, const FiniteSpace& Xp,
                                           const std::vector<double>& grid, const SolverConfig& cfg,
                                           double tol = 1e-8);

// sum_i D^2(X0,Xi) >= (1/3) sum_{i<j} D^2(Xi,Xj) - tol over certified values.
struct QuadrupleReport {
    Verdict verdict = Verdict::INCONCLUSIVE;
    double slack = 0.0;
    bool conclusive = false;
    std::vector<std::pair<std::string, double>> distances;
    double tol = 1e-8;
};

QuadrupleReport check_quadruple(const FiniteSpace& X0, const FiniteSpace& X1, const FiniteSpace& X2,
                                const FiniteSpace& X3, const SolverConfig& cfg, double tol = 1e-8);

}  // namespace mmflow
