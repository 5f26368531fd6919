#pragma once

#include <utility>
#include <vector>

namespace mmflow {

// Exact dense transportation solve: minimize sum c[i*n1+j]*x[i*n1+j] over
// plans with row sums w0 and column sums w1. Successive shortest augmenting
// paths with potentials; deterministic (index-order tie breaking). Costs may
// be negative. Returns the optimal plan.
std::vector<double> solve_transport(int n0, int n1, const std::vector<double>& cost,
                                    const std::vector<double>& w0, const std::vector<double>& w1);

// p-Wasserstein distance between two distributions on the line, each given as
// a list of (value, mass) atoms, by quantile matching. p = inf gives the max
// quantile gap. Masses must sum to the same total (authoritative: 1).
double wasserstein_1d(std::vector<std::pair<double, double>> atoms0,
                      std::vector<std::pair<double, double>> atoms1, double p);

}  // namespace mmflow
