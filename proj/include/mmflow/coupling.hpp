#pragma once

#include <vector>

#include "mmflow/parallel.hpp"
#include "mmflow/space.hpp"

namespace mmflow {

// Transport plan between two weight vectors: nonnegative rows x cols matrix
// whose row sums are w0 and column sums are w1 (within 1e-10).
struct Coupling {
    int rows = 0;
    int cols = 0;
    std::vector<double> plan;  // row-major rows*cols
    std::vector<double> w0;
    std::vector<double> w1;

    double p(int i, int j) const { return plan[static_cast<std::size_t>(i) * cols + j]; }
};

// Validates signs and both marginals (1e-10).
Coupling make_coupling(int rows, int cols, std::vector<double> plan, std::vector<double> w0,
                       std::vector<double> w1);

Coupling product_coupling(const std::vector<double>& w0, const std::vector<double>& w1);
Coupling diagonal_coupling(const std::vector<double>& w);

// plan[i][sigma[i]] = 1/n; requires uniform weights.
Coupling permutation_coupling(const std::vector<int>& sigma, const std::vector<double>& w);

Coupling transpose(const Coupling& mu);

// Gluing through the shared middle marginal: T[i][j][k] = mu1[i][j]*mu2[j][k]/w1[j]
// (0 on zero-mass middle atoms).
struct GluedTensor {
    int n0 = 0, n1 = 0, n2 = 0;
    std::vector<double> t;  // row-major n0*n1*n2
    double at(int i, int j, int k) const {
        return t[(static_cast<std::size_t>(i) * n1 + j) * n2 + k];
    }
};

GluedTensor glue(const Coupling& mu1, const Coupling& mu2);

// Outer (0,2)-marginal of the gluing.
Coupling melt(const Coupling& mu1, const Coupling& mu2);

// L^p distortion of a coupling between X0 and X1:
// (sum |g0(i,j) - g1(i',j')|^p mu(i,i') mu(j,j'))^(1/p); p = inf takes the max
// over pairs of support entries (plan > 1e-15).
double distortion(const Coupling& mu, const FiniteSpace& X0, const FiniteSpace& X1, double p,
                  Backend backend = Backend::parallel);

// Norm of a self-coupling of X: sqrt(sum (g(i,j) - g(i',j'))^2 mu(i,i') mu(j,j')).
double coupling_norm(const Coupling& mu, const FiniteSpace& X, Backend backend = Backend::parallel);

// All gauge- and weight-preserving permutations of X (exhaustive; n <= bound).
struct SymmetryGroup {
    int n = 0;
    std::vector<std::vector<int>> elements;
};

SymmetryGroup symmetry_group(const FiniteSpace& X, int bound = 10);

}  // namespace mmflow
