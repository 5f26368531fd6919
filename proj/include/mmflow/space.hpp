#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmflow {

// Bad or inconsistent input data (files, matrices, weights).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A solver or operation was invoked outside its supported regime.
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Exact weight k/N, kept alongside the double when the input provided it.
struct Rational {
    long long num = 0;
    long long den = 1;
};

// Which axioms a gauge matrix satisfies. Validation only ever downgrades:
// every metric space is pseudo-metric, every pseudo-metric space is gauged.
enum class SpaceClassKind { gauged, pseudo_metric, metric };

const char* to_string(SpaceClassKind kind);

// Finite gauged measure space: n points, a symmetric gauge matrix with zero
// diagonal (entries may be negative; no triangle inequality assumed) and a
// probability weight vector. Immutable by convention: construct via
// make_space, treat as read-only afterwards.
struct FiniteSpace {
    int n = 0;
    std::vector<double> gauge;        // row-major n*n
    std::vector<double> weights;      // nonnegative, sums to 1
    std::vector<Rational> rationals;  // exact weights when known, else empty
    std::string name;

    double g(int i, int j) const { return gauge[static_cast<std::size_t>(i) * n + j]; }
    double w(int i) const { return weights[static_cast<std::size_t>(i)]; }
};

// Validates shapes, symmetry (1e-12), weight signs and sum (1e-9), forces an
// exactly symmetric matrix with zero diagonal and renormalizes the weights.
FiniteSpace make_space(int n, std::vector<double> gauge, std::vector<double> weights,
                       std::string name = "", std::vector<Rational> rationals = {});

SpaceClassKind validate(const FiniteSpace& X);

// L^p norm of the gauge under the product weight measure; p = inf gives the
// support diameter (max |gauge| over pairs of positive-weight points).
double size_p(const FiniteSpace& X, double p);

FiniteSpace scale(const FiniteSpace& X, double t);

// Divides the gauge by size_2(X); the result has unit size.
FiniteSpace normalize_to_unit_sphere(const FiniteSpace& X);

// Refines atom i into k_i copies at mutual gauge 0, where weight_i == k_i/N;
// the result is uniform on N points and at distortion distance 0 from X.
FiniteSpace split_atoms(const FiniteSpace& X, long long N);

// Total triangle-inequality violation over ordered triples:
// sum of max(0, g(i,k) - g(i,j) - g(j,k)) * w_i w_j w_k.
double triangle_defect(const FiniteSpace& X);

// Canonical constructors used by tests, the CLI and sample data.
FiniteSpace make_delta();
FiniteSpace make_two_point(double edge, double w0 = 0.5, std::string name = "");
FiniteSpace make_complete_graph(int n, double edge = 1.0);
FiniteSpace make_discrete_circle(int n);
FiniteSpace make_path_graph(int n, double edge = 1.0);
// Center plus `leaves` points at distance `leg` from it (pairwise 2*leg).
FiniteSpace make_star(int leaves, double leg = 1.0);

}  // namespace mmflow
