#include "mmflow/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace mmflow {

namespace {

constexpr double kGaugeTol = 1e-12;
constexpr double kWeightSumTol = 1e-9;

long long gcd_ll(long long a, long long b) {
    a = std::llabs(a);
    b = std::llabs(b);
    while (b) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

const char* to_string(SpaceClassKind kind) {
    switch (kind) {
        case SpaceClassKind::gauged: return "gauged";
        case SpaceClassKind::pseudo_metric: return "pseudo_metric";
        case SpaceClassKind::metric: return "metric";
    }
    return "unknown";
}

FiniteSpace make_space(int n, std::vector<double> gauge, std::vector<double> weights,
                       std::string name, std::vector<Rational> rationals) {
    if (n < 1) throw InputError("space: n must be >= 1");
    if (gauge.size() != static_cast<std::size_t>(n) * n)
        throw InputError("space: gauge shape mismatch (expected " + std::to_string(n) + "x" +
                         std::to_string(n) + ")");
    if (weights.size() != static_cast<std::size_t>(n))
        throw InputError("space: weight vector length mismatch");
    if (!rationals.empty() && rationals.size() != static_cast<std::size_t>(n))
        throw InputError("space: rational weight vector length mismatch");

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double a = gauge[static_cast<std::size_t>(i) * n + j];
            double b = gauge[static_cast<std::size_t>(j) * n + i];
            if (!std::isfinite(a) || !std::isfinite(b)) throw InputError("space: non-finite gauge entry");
            if (std::fabs(a - b) > kGaugeTol)
                throw InputError("space: gauge asymmetry beyond 1e-12 at (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
            double v = 0.5 * (a + b);
            gauge[static_cast<std::size_t>(i) * n + j] = v;
            gauge[static_cast<std::size_t>(j) * n + i] = v;
        }
        gauge[static_cast<std::size_t>(i) * n + i] = 0.0;
    }

    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw InputError("space: negative weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > kWeightSumTol)
        throw InputError("space: weight sum off by more than 1e-9 (sum = " + std::to_string(sum) + ")");
    for (double& w : weights) w /= sum;

    for (Rational& r : rationals) {
        if (r.den <= 0) throw InputError("space: rational weight with nonpositive denominator");
        if (r.num < 0) throw InputError("space: negative rational weight");
        long long g = gcd_ll(r.num, r.den);
        if (g > 1) {
            r.num /= g;
            r.den /= g;
        }
    }

    FiniteSpace X;
    X.n = n;
    X.gauge = std::move(gauge);
    X.weights = std::move(weights);
    X.rationals = std::move(rationals);
    X.name = std::move(name);
    return X;
}

SpaceClassKind validate(const FiniteSpace& X) {
    // Axiom checks run on the support only; zero-weight points are ignored.
    std::vector<int> sup;
    for (int i = 0; i < X.n; ++i)
        if (X.w(i) > 0.0) sup.push_back(i);

    bool nonneg = true;
    for (int a : sup)
        for (int b : sup)
            if (X.g(a, b) < -kGaugeTol) nonneg = false;

    bool triangle = true;
    if (nonneg) {
        for (int a : sup) {
            for (int b : sup) {
                for (int c : sup) {
                    if (X.g(a, c) > X.g(a, b) + X.g(b, c) + kGaugeTol) {
                        triangle = false;
                        break;
                    }
                }
                if (!triangle) break;
            }
            if (!triangle) break;
        }
    }
    if (!nonneg || !triangle) return SpaceClassKind::gauged;

    for (int a : sup)
        for (int b : sup)
            if (a != b && X.g(a, b) <= kGaugeTol) return SpaceClassKind::pseudo_metric;
    return SpaceClassKind::metric;
}

double size_p(const FiniteSpace& X, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (int i = 0; i < X.n; ++i) {
            if (X.w(i) <= 0.0) continue;
            for (int j = 0; j < X.n; ++j) {
                if (X.w(j) <= 0.0) continue;
                m = std::max(m, std::fabs(X.g(i, j)));
            }
        }
        return m;
    }
    if (!(p >= 1.0)) throw PreconditionError("size_p: p must be >= 1 or inf");
    double acc = 0.0;
    for (int i = 0; i < X.n; ++i)
        for (int j = 0; j < X.n; ++j) {
            double v = std::fabs(X.g(i, j));
            double term = (p == 2.0) ? v * v : (p == 1.0 ? v : std::pow(v, p));
            acc += term * X.w(i) * X.w(j);
        }
    return (p == 2.0) ? std::sqrt(acc) : (p == 1.0 ? acc : std::pow(acc, 1.0 / p));
}

FiniteSpace scale(const FiniteSpace& X, double t) {
    if (!(t >= 0.0)) throw PreconditionError("scale: factor must be >= 0");
    FiniteSpace Y = X;
    for (double& v : Y.gauge) v *= t;
    return Y;
}

FiniteSpace normalize_to_unit_sphere(const FiniteSpace& X) {
    double s = size_p(X, 2.0);
    if (s <= 1e-15) throw PreconditionError("normalize_to_unit_sphere: zero size");
    return scale(X, 1.0 / s);
}

FiniteSpace split_atoms(const FiniteSpace& X, long long N) {
    if (N < 1) throw InputError("split_atoms: denominator must be positive");
    std::vector<long long> counts(X.n);
    long long total = 0;
    for (int i = 0; i < X.n; ++i) {
        long long k;
        if (!X.rationals.empty()) {
            const Rational& r = X.rationals[i];
            if (N % r.den != 0)
                throw InputError("split_atoms: weight " + std::to_string(r.num) + "/" +
                                 std::to_string(r.den) + " not representable over " + std::to_string(N));
            k = r.num * (N / r.den);
        } else {
            k = std::llround(X.w(i) * static_cast<double>(N));
            if (std::fabs(X.w(i) - static_cast<double>(k) / static_cast<double>(N)) > kGaugeTol)
                throw InputError("split_atoms: weight " + std::to_string(X.w(i)) +
                                 " not representable over " + std::to_string(N));
        }
        counts[i] = k;
        total += k;
    }
    if (total != N) throw InputError("split_atoms: weights do not sum to N/N");

    std::vector<int> atom(static_cast<std::size_t>(N));
    int pos = 0;
    for (int i = 0; i < X.n; ++i)
        for (long long c = 0; c < counts[i]; ++c) atom[pos++] = i;

    std::vector<double> gauge(static_cast<std::size_t>(N) * N);
    for (long long a = 0; a < N; ++a)
        for (long long b = 0; b < N; ++b)
            gauge[a * N + b] = (atom[a] == atom[b]) ? 0.0 : X.g(atom[a], atom[b]);
    std::vector<double> w(static_cast<std::size_t>(N), 1.0 / static_cast<double>(N));
    std::vector<Rational> rat(static_cast<std::size_t>(N), Rational{1, N});
    return make_space(static_cast<int>(N), std::move(gauge), std::move(w),
                      X.name.empty() ? "" : X.name + "/split" + std::to_string(N), std::move(rat));
}

double triangle_defect(const FiniteSpace& X) {
    double acc = 0.0;
    for (int i = 0; i < X.n; ++i)
        for (int j = 0; j < X.n; ++j)
            for (int k = 0; k < X.n; ++k) {
                double v = X.g(i, k) - X.g(i, j) - X.g(j, k);
                if (v > 0.0) acc += v * X.w(i) * X.w(j) * X.w(k);
            }
    return acc;
}

FiniteSpace make_delta() { return make_space(1, {0.0}, {1.0}, "delta", {Rational{1, 1}}); }

FiniteSpace make_two_point(double edge, double w0, std::string name) {
    return make_space(2, {0.0, edge, edge, 0.0}, {w0, 1.0 - w0}, std::move(name));
}

FiniteSpace make_complete_graph(int n, double edge) {
    std::vector<double> g(static_cast<std::size_t>(n) * n, edge);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i) * n + i] = 0.0;
    std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<Rational> rat(static_cast<std::size_t>(n), Rational{1, n});
    return make_space(n, std::move(g), std::move(w), "K" + std::to_string(n), std::move(rat));
}

FiniteSpace make_discrete_circle(int n) {
    std::vector<double> g(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int k = std::abs(i - j);
            g[static_cast<std::size_t>(i) * n + j] = static_cast<double>(std::min(k, n - k));
        }
    std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<Rational> rat(static_cast<std::size_t>(n), Rational{1, n});
    return make_space(n, std::move(g), std::move(w), "circle" + std::to_string(n), std::move(rat));
}

FiniteSpace make_path_graph(int n, double edge) {
    std::vector<double> g(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g[static_cast<std::size_t>(i) * n + j] = edge * std::abs(i - j);
    std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<Rational> rat(static_cast<std::size_t>(n), Rational{1, n});
    return make_space(n, std::move(g), std::move(w), "path" + std::to_string(n), std::move(rat));
}

FiniteSpace make_star(int leaves, double leg) {
    int n = leaves + 1;
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 1; i < n; ++i) {
        g[static_cast<std::size_t>(0) * n + i] = leg;
        g[static_cast<std::size_t>(i) * n + 0] = leg;
        for (int j = 1; j < n; ++j)
            if (i != j) g[static_cast<std::size_t>(i) * n + j] = 2.0 * leg;
    }
    std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
    std::vector<Rational> rat(static_cast<std::size_t>(n), Rational{1, n});
    return make_space(n, std::move(g), std::move(w), "star" + std::to_string(leaves), std::move(rat));
}

}  // namespace mmflow
