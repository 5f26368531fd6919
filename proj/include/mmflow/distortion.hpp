#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmflow/coupling.hpp"
#include "mmflow/space.hpp"

namespace mmflow {

struct SolverConfig {
    int exhaustive_bound = 8;
    int fw_restarts = 16;
    int fw_max_iter = 1000;
    double tol = 1e-9;
    std::uint64_t seed = 0;
};

// Certified interval for a distortion distance: lower is a proven bound,
// upper the distortion of best_coupling; certified iff they meet within tol.
struct DistResult {
    double lower = 0.0;
    double upper = 0.0;
    Coupling best_coupling;
    bool certified = false;
    std::vector<std::pair<std::string, double>> solver_trace;
};

// |size_p(X0) - size_p(X1)|: reverse triangle inequality through the
// one-point space.
double lower_bound_size(const FiniteSpace& X0, const FiniteSpace& X1, double p = 2.0);

// 1D p-Wasserstein distance between the two gauge-value distributions
// (value g(i,j), mass w_i*w_j); a lower bound for D_p since any coupling
// pushes forward to a coupling of these laws.
double lower_bound_distance_distribution(const FiniteSpace& X0, const FiniteSpace& X1, double p = 2.0);

// Minimum distortion over all n! permutation couplings (uniform, equal n).
std::pair<double, Coupling> solve_exhaustive_permutations(const FiniteSpace& X0, const FiniteSpace& X1,
                                                          double p, Backend backend = Backend::parallel);

// Local maximization of Q(mu) = <mu, D0 mu D1> over the coupling polytope by
// conditional gradient steps with exact transport subproblems and closed-form
// line search; best over restarts (product coupling, then seeded vertices).
// p = 2 only. Returns the induced distance upper bound and its coupling.
std::pair<double, Coupling> solve_frank_wolfe(const FiniteSpace& X0, const FiniteSpace& X1,
                                              const SolverConfig& cfg,
                                              Backend backend = Backend::parallel);

enum class SolverChoice { automatic, exhaustive, frank_wolfe };

// Certified-interval front end: runs the lower-bound routines plus every
// applicable solver, keeps the best coupling found.
DistResult dist(const FiniteSpace& X0, const FiniteSpace& X1, double p, const SolverConfig& cfg,
                SolverChoice choice = SolverChoice::automatic, Backend backend = Backend::parallel);

// Quotient metric on n-point gauge matrices with uniform weights:
// min over permutations of sqrt((2/n^2) sum_{i<j} (f_ij - g_{s(i)s(j)})^2).
double npoint_quotient_distance(const FiniteSpace& f, const FiniteSpace& g, int bound = 8);

}  // namespace mmflow
