#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmflow/geometry.hpp"
#include "mmflow/space.hpp"

namespace mmflow {

// Piecewise map used by the curvature detectors: zeta(r) = -2r-1 for r <= -1,
// r^2 on [-1,0], 0 for r >= 0. C^1 with derivative in [-2,0].
double zeta(double r);
double zeta_prime(double r);

// Polynomial functional of order n: U(X) = integral of u over n-tuples, where
// u reads the gauge values of all n(n-1)/2 tuple pairs packed lexicographically
// ((0,1),(0,2),...,(1,2),...). Partials follow the same packing.
struct PolynomialSpec {
    int order = 2;
    std::function<double(const double*)> u;
    std::vector<std::function<double(const double*)>> partials;
    std::string growth_guard;
};

int pair_index(int i, int j, int order);  // i < j

struct MonteCarlo {
    long long samples = 0;
    std::uint64_t seed = 0;
};

struct EvalResult {
    double value = 0.0;
    std::optional<double> stderr_est;
};

// Exact tuple summation (guard: n_points^order <= 1e8) or Monte Carlo with
// sample mean and standard error.
EvalResult eval_polynomial(const PolynomialSpec& spec, const FiniteSpace& X,
                           std::optional<MonteCarlo> mc = std::nullopt,
                           Backend backend = Backend::parallel);

// d/dt U(X + t*v) at t=0: sum over tuples of partial_{ij} u * v(x_i, x_j).
double directional_derivative(const PolynomialSpec& spec, const FiniteSpace& X, const TangentVector& v,
                              Backend backend = Backend::parallel);

// Riesz representative of the derivative in L2(m x m): the symmetrized
// two-slot kernel obtained by integrating each partial over the remaining
// n-2 slots.
TangentVector ambient_gradient_polynomial(const PolynomialSpec& spec, const FiniteSpace& X,
                                          Backend backend = Backend::parallel);

// Curvature detectors. Values may be +infinity (a value, not an error).
struct FunctionalValue {
    double value = 0.0;
    std::optional<double> stderr_est;
    std::optional<std::array<int, 4>> flagged_quadruple;  // witness of +inf (H_K, K>0)
};

PolynomialSpec make_G_spec(double K);  // integrand only; perimeter guard is eval_G's
PolynomialSpec make_H_spec(double K);  // K >= 0 or K < 0 smooth branches

FunctionalValue eval_G(const FiniteSpace& X, double K, std::optional<MonteCarlo> mc = std::nullopt,
                       Backend backend = Backend::parallel);
FunctionalValue eval_H(const FiniteSpace& X, double K, std::optional<MonteCarlo> mc = std::nullopt,
                       Backend backend = Backend::parallel);

// Closed-form ambient gradients at K = 0 (double integral per entry).
TangentVector gradient_G0(const FiniteSpace& X, Backend backend = Backend::parallel);
TangentVector gradient_H0(const FiniteSpace& X, Backend backend = Backend::parallel);

// Nested polynomial U(X) = int U( int eta(d(x,y)) dm(y) ) dm(x).
struct ScalarFn {
    std::function<double(double)> f;
    std::function<double(double)> df;
};

double eval_nested(const ScalarFn& U, const ScalarFn& eta, const FiniteSpace& X);

// Gradient kernel 0.5*(U'(w(x)) + U'(w(y))) * eta'(d(x,y)) with
// w(x) = int eta(d(x,z)) dm(z).
TangentVector gradient_nested(const ScalarFn& U, const ScalarFn& eta, const FiniteSpace& X);

}  // namespace mmflow
