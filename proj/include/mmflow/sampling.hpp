#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmflow/parallel.hpp"
#include "mmflow/space.hpp"

namespace mmflow {

// One draw from the matrix distribution of a space: the pairwise gauge values
// of `order` points sampled i.i.d. from the weights.
struct MatrixSample {
    int order = 0;
    std::vector<double> entries;  // upper-triangular row-major, order*(order-1)/2
    std::uint64_t seed = 0;       // per-sample seed actually consumed
};

std::vector<MatrixSample> sample_matrix_distribution(const FiniteSpace& X, int order, long long count,
                                                     std::uint64_t seed, Backend backend = Backend::parallel);

struct HomomorphismReport {
    bool exact = false;
    std::string method;      // "exact-nu2" or "energy-permutation"
    double statistic = 0.0;  // L1 gap between exact laws, or energy distance
    std::optional<double> p_value;
    long long count = 0;
    bool reject = false;  // REJECT vs NO-EVIDENCE; never a claim of homomorphism
};

// Two-sample comparison of matrix distributions. Tiny order-2 cases are
// compared by exact enumeration of the laws; otherwise an energy-distance
// permutation test (200 resamples) under the permutation-quotient metric on
// sample matrices.
HomomorphismReport empirical_homomorphism_test(const FiniteSpace& X0, const FiniteSpace& X1, int order,
                                               long long count, std::uint64_t seed,
                                               Backend backend = Backend::parallel);

}  // namespace mmflow
