#include "mmflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmflow/parallel.hpp"
#include "mmflow/rng.hpp"

namespace mmflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExactGuard = 1e8;
constexpr double kPi = 3.14159265358979323846;

std::vector<int> support_indices(const FiniteSpace& X) {
    std::vector<int> sup;
    for (int i = 0; i < X.n; ++i)
        if (X.w(i) > 0.0) sup.push_back(i);
    return sup;
}

// flat index -> tuple of support positions, most significant digit first
void decode_tuple(long long flat, long long base, int order, int* digits) {
    for (int k = order - 1; k >= 0; --k) {
        digits[k] = static_cast<int>(flat % base);
        flat /= base;
    }
}

void load_xi(const FiniteSpace& X, const std::vector<int>& sup, const int* digits, int order, double* xi) {
    for (int i = 0; i < order; ++i)
        for (int j = i + 1; j < order; ++j)
            xi[pair_index(i, j, order)] = X.g(sup[digits[i]], sup[digits[j]]);
}

double tuple_mass(const FiniteSpace& X, const std::vector<int>& sup, const int* digits, int order) {
    double m = 1.0;
    for (int k = 0; k < order; ++k) m *= X.w(sup[digits[k]]);
    return m;
}

void require_exact_guard(int n, int order, const char* what) {
    if (std::pow(static_cast<double>(n), order) > kExactGuard)
        throw PreconditionError(std::string(what) + ": exact tuple sum exceeds the n^order <= 1e8 guard; use Monte Carlo");
}

void require_partials(const PolynomialSpec& spec, const char* what) {
    if (static_cast<int>(spec.partials.size()) != spec.order * (spec.order - 1) / 2)
        throw PreconditionError(std::string(what) + ": spec does not provide all n(n-1)/2 partial derivatives");
}

constexpr int kMaxOrder = 16;

}  // namespace

double zeta(double r) {
    if (r <= -1.0) return -2.0 * r - 1.0;
    if (r >= 0.0) return 0.0;
    return r * r;
}

double zeta_prime(double r) {
    if (r <= -1.0) return -2.0;
    if (r >= 0.0) return 0.0;
    return 2.0 * r;
}

int pair_index(int i, int j, int order) {
    return i * order - i * (i + 1) / 2 + (j - i - 1);
}

EvalResult eval_polynomial(const PolynomialSpec& spec, const FiniteSpace& X,
                           std::optional<MonteCarlo> mc, Backend backend) {
    if (spec.order < 2 || spec.order > kMaxOrder) throw InputError("eval_polynomial: order out of range");
    if (!spec.u) throw InputError("eval_polynomial: missing integrand");
    const int order = spec.order;
    const int npairs = order * (order - 1) / 2;

    if (!mc) {
        require_exact_guard(X.n, order, "eval_polynomial");
        const std::vector<int> sup = support_indices(X);
        const long long S = static_cast<long long>(sup.size());
        long long total = 1;
        for (int k = 0; k < order; ++k) total *= S;
        double value = parallel_sum(total, backend, [&](long long a) {
            int digits[kMaxOrder];
            double xi[kMaxOrder * (kMaxOrder - 1) / 2];
            decode_tuple(a, S, order, digits);
            load_xi(X, sup, digits, order, xi);
            return tuple_mass(X, sup, digits, order) * spec.u(xi);
        });
        return {value, std::nullopt};
    }

    const long long samples = mc->samples;
    if (samples <= 0) throw InputError("eval_polynomial: Monte Carlo needs a positive sample count");
    const std::vector<double> cum = cumulative(X.weights);
    std::vector<double> vals(static_cast<std::size_t>(samples));
    parallel_for(samples, backend, [&](long long s) {
        Rng rng(mix_seed(mc->seed, static_cast<std::uint64_t>(s)));
        int idx[kMaxOrder];
        double xi[kMaxOrder * (kMaxOrder - 1) / 2];
        for (int k = 0; k < order; ++k) idx[k] = rng.sample_cdf(cum);
        for (int i = 0; i < order; ++i)
            for (int j = i + 1; j < order; ++j)
                xi[pair_index(i, j, order)] = X.g(idx[i], idx[j]);
        (void)npairs;
        vals[static_cast<std::size_t>(s)] = spec.u(xi);
    });
    double mean = parallel_sum(samples, backend, [&](long long s) { return vals[static_cast<std::size_t>(s)]; }) /
                  static_cast<double>(samples);
    if (!std::isfinite(mean)) return {mean, std::nullopt};
    if (samples < 2) return {mean, std::nullopt};
    double var = parallel_sum(samples, backend, [&](long long s) {
                     double d = vals[static_cast<std::size_t>(s)] - mean;
                     return d * d;
                 }) /
                 static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples))};
}

double directional_derivative(const PolynomialSpec& spec, const FiniteSpace& X, const TangentVector& v,
                              Backend backend) {
    if (spec.order < 2 || spec.order > kMaxOrder) throw InputError("directional_derivative: order out of range");
    require_partials(spec, "directional_derivative");
    if (v.n != X.n) throw InputError("directional_derivative: tangent size mismatch");
    require_exact_guard(X.n, spec.order, "directional_derivative");
    const int order = spec.order;
    const std::vector<int> sup = support_indices(X);
    const long long S = static_cast<long long>(sup.size());
    long long total = 1;
    for (int k = 0; k < order; ++k) total *= S;
    return parallel_sum(total, backend, [&](long long a) {
        int digits[kMaxOrder];
        double xi[kMaxOrder * (kMaxOrder - 1) / 2];
        decode_tuple(a, S, order, digits);
        load_xi(X, sup, digits, order, xi);
        const double m = tuple_mass(X, sup, digits, order);
        double acc = 0.0;
        for (int i = 0; i < order; ++i)
            for (int j = i + 1; j < order; ++j)
                acc += spec.partials[pair_index(i, j, order)](xi) * v.at(sup[digits[i]], sup[digits[j]]);
        return m * acc;
    });
}

TangentVector ambient_gradient_polynomial(const PolynomialSpec& spec, const FiniteSpace& X, Backend backend) {
    if (spec.order < 2 || spec.order > kMaxOrder) throw InputError("ambient_gradient_polynomial: order out of range");
    require_partials(spec, "ambient_gradient_polynomial");
    if (std::pow(static_cast<double>(X.n), spec.order - 2) > kExactGuard)
        throw PreconditionError("ambient_gradient_polynomial: n^(order-2) <= 1e8 guard exceeded");
    const int order = spec.order;
    const int n = X.n;
    const std::vector<int> sup = support_indices(X);
    const long long S = static_cast<long long>(sup.size());
    long long rest = 1;
    for (int k = 0; k + 2 < order; ++k) rest *= S;

    // f~(y,z): y at slot i, z at slot j for every i < j, integrate the rest.
    auto ftilde = [&](int y, int z) {
        double acc = 0.0;
        for (int si = 0; si < order; ++si) {
            for (int sj = si + 1; sj < order; ++sj) {
                for (long long a = 0; a < rest; ++a) {
                    int others[kMaxOrder];
                    decode_tuple(a, S, order - 2, others);
                    int tuple[kMaxOrder];
                    int next = 0;
                    for (int k = 0; k < order; ++k) {
                        if (k == si) tuple[k] = y;
                        else if (k == sj) tuple[k] = z;
                        else tuple[k] = sup[others[next++]];
                    }
                    double m = 1.0;
                    for (int k = 0; k < order; ++k)
                        if (k != si && k != sj) m *= X.w(tuple[k]);
                    if (m == 0.0) continue;
                    double xi[kMaxOrder * (kMaxOrder - 1) / 2];
                    for (int i = 0; i < order; ++i)
                        for (int j = i + 1; j < order; ++j)
                            xi[pair_index(i, j, order)] = X.g(tuple[i], tuple[j]);
                    acc += m * spec.partials[pair_index(si, sj, order)](xi);
                }
            }
        }
        return acc;
    };

    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<std::pair<int, int>> pairs;
    for (int y = 0; y < n; ++y)
        for (int z = y + 1; z < n; ++z) pairs.emplace_back(y, z);
    parallel_for(static_cast<long long>(pairs.size()), backend, [&](long long k) {
        auto [y, z] = pairs[static_cast<std::size_t>(k)];
        double val = 0.5 * (ftilde(y, z) + ftilde(z, y));
        g[static_cast<std::size_t>(y) * n + z] = val;
        g[static_cast<std::size_t>(z) * n + y] = val;
    });
    return make_tangent(n, std::move(g));
}

PolynomialSpec make_G_spec(double K) {
    PolynomialSpec spec;
    spec.order = 4;
    // packing for order 4: 0:(0,1) 1:(0,2) 2:(0,3) 3:(1,2) 4:(1,3) 5:(2,3);
    // slot 0 is the apex, slots 1..3 the triangle.
    if (K == 0.0) {
        spec.growth_guard = "|u| <= 2|A|+1 with A quadratic in the gauge values";
        auto arg = [](const double* xi) {
            return 3.0 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) -
                   (xi[3] * xi[3] + xi[4] * xi[4] + xi[5] * xi[5]);
        };
        spec.u = [arg](const double* xi) { return zeta(arg(xi)); };
        for (int e = 0; e < 6; ++e) {
            const double c = (e < 3) ? 6.0 : -2.0;
            spec.partials.push_back([arg, c, e](const double* xi) { return c * xi[e] * zeta_prime(arg(xi)); });
        }
    } else if (K > 0.0) {
        const double sq = std::sqrt(K);
        spec.growth_guard = "|u| <= 2|arg|+1 with |arg| <= 12/K";
        auto arg = [sq, K](const double* xi) {
            const double s1 = std::cos(sq * xi[0]) + std::cos(sq * xi[1]) + std::cos(sq * xi[2]);
            const double s2 = std::cos(sq * xi[3]) + std::cos(sq * xi[4]) + std::cos(sq * xi[5]);
            return (-s1 * s1 + 3.0 + 2.0 * s2) / K;
        };
        spec.u = [arg](const double* xi) { return zeta(arg(xi)); };
        for (int e = 0; e < 6; ++e) {
            if (e < 3) {
                spec.partials.push_back([arg, sq, e](const double* xi) {
                    const double s1 = std::cos(sq * xi[0]) + std::cos(sq * xi[1]) + std::cos(sq * xi[2]);
                    return zeta_prime(arg(xi)) * (2.0 / sq) * s1 * std::sin(sq * xi[e]);
                });
            } else {
                spec.partials.push_back([arg, sq, e](const double* xi) {
                    return zeta_prime(arg(xi)) * (-2.0 / sq) * std::sin(sq * xi[e]);
                });
            }
        }
    } else {
        const double kp = std::sqrt(-K);
        spec.growth_guard = "|u| <= 2|arg|+1 with arg log-bounded by the gauge diameter";
        auto parts = [kp](const double* xi, double& ca, double& cb) {
            ca = std::cosh(kp * xi[0]) + std::cosh(kp * xi[1]) + std::cosh(kp * xi[2]);
            cb = 1.0 / 3.0 + (2.0 / 9.0) * (std::cosh(kp * xi[3]) + std::cosh(kp * xi[4]) + std::cosh(kp * xi[5]));
        };
        auto arg = [kp, parts](const double* xi) {
            double ca, cb;
            parts(xi, ca, cb);
            return (18.0 / (kp * kp)) * std::log(ca / 3.0) - (9.0 / (kp * kp)) * std::log(cb);
        };
        spec.u = [arg](const double* xi) { return zeta(arg(xi)); };
        for (int e = 0; e < 6; ++e) {
            if (e < 3) {
                spec.partials.push_back([arg, parts, kp, e](const double* xi) {
                    double ca, cb;
                    parts(xi, ca, cb);
                    return zeta_prime(arg(xi)) * (18.0 / kp) * std::sinh(kp * xi[e]) / ca;
                });
            } else {
                spec.partials.push_back([arg, parts, kp, e](const double* xi) {
                    double ca, cb;
                    parts(xi, ca, cb);
                    return zeta_prime(arg(xi)) * (-2.0 / kp) * std::sinh(kp * xi[e]) / cb;
                });
            }
        }
    }
    return spec;
}

PolynomialSpec make_H_spec(double K) {
    PolynomialSpec spec;
    spec.order = 4;
    // cycle edges (0,1),(1,2),(2,3),(3,0) -> xi indices 0,3,5,2;
    // diagonals (0,2),(1,3) -> xi indices 1,4.
    static constexpr int kCycle[4] = {0, 3, 5, 2};
    if (K == 0.0) {
        spec.growth_guard = "|u| <= 2|B|+1 with B quadratic in the gauge values";
        auto arg = [](const double* xi) {
            return xi[0] * xi[0] + xi[3] * xi[3] + xi[5] * xi[5] + xi[2] * xi[2] - xi[1] * xi[1] - xi[4] * xi[4];
        };
        spec.u = [arg](const double* xi) { return zeta(arg(xi)); };
        for (int e = 0; e < 6; ++e) {
            const double c = (e == 1 || e == 4) ? -2.0 : 2.0;
            spec.partials.push_back([arg, c, e](const double* xi) { return c * xi[e] * zeta_prime(arg(xi)); });
        }
    } else if (K > 0.0) {
        const double sq = std::sqrt(K);
        spec.growth_guard = "u in [0, +inf]; finite branch bounded by 2|arg|+1 with |arg| <= 16/K";
        auto in_range = [sq](const double* xi) {
            for (int c = 0; c < 4; ++c)
                if (sq * xi[kCycle[c]] > kPi / 2.0) return false;
            return true;
        };
        auto arg = [sq, K](const double* xi) {
            const double cyc = std::cos(sq * xi[0]) + std::cos(sq * xi[3]) + std::cos(sq * xi[5]) + std::cos(sq * xi[2]);
            return (-2.0 * cyc + 8.0 * std::cos(0.5 * sq * xi[1]) * std::cos(0.5 * sq * xi[4])) / K;
        };
        spec.u = [arg, in_range](const double* xi) { return in_range(xi) ? zeta(arg(xi)) : kInf; };
        for (int e = 0; e < 6; ++e) {
            if (e == 1 || e == 4) {
                const int other = (e == 1) ? 4 : 1;
                spec.partials.push_back([arg, in_range, sq, e, other](const double* xi) {
                    if (!in_range(xi)) return 0.0;
                    return zeta_prime(arg(xi)) * (-4.0 / sq) * std::sin(0.5 * sq * xi[e]) *
                           std::cos(0.5 * sq * xi[other]);
                });
            } else {
                spec.partials.push_back([arg, in_range, sq, e](const double* xi) {
                    if (!in_range(xi)) return 0.0;
                    return zeta_prime(arg(xi)) * (2.0 / sq) * std::sin(sq * xi[e]);
                });
            }
        }
    } else {
        const double kp = std::sqrt(-K);
        spec.growth_guard = "|u| <= 2|arg|+1 with arg log-bounded by the gauge diameter";
        auto cyc_sum = [kp](const double* xi) {
            return std::cosh(kp * xi[0]) + std::cosh(kp * xi[3]) + std::cosh(kp * xi[5]) + std::cosh(kp * xi[2]);
        };
        auto arg = [kp, cyc_sum](const double* xi) {
            const double diag = std::cosh(0.5 * kp * xi[1]) * std::cosh(0.5 * kp * xi[4]);
            return (8.0 / (kp * kp)) * (std::log(cyc_sum(xi) / 4.0) - std::log(diag));
        };
        spec.u = [arg](const double* xi) { return zeta(arg(xi)); };
        for (int e = 0; e < 6; ++e) {
            if (e == 1 || e == 4) {
                spec.partials.push_back([arg, kp, e](const double* xi) {
                    return zeta_prime(arg(xi)) * (-4.0 / kp) * std::tanh(0.5 * kp * xi[e]);
                });
            } else {
                spec.partials.push_back([arg, cyc_sum, kp, e](const double* xi) {
                    return zeta_prime(arg(xi)) * (8.0 / kp) * std::sinh(kp * xi[e]) / cyc_sum(xi);
                });
            }
        }
    }
    return spec;
}

namespace {

// K>0 domain guard: every positive-mass triple must have perimeter <= 2*pi/sqrt(K).
bool perimeter_ok(const FiniteSpace& X, double K) {
    const double bound = 2.0 * kPi / std::sqrt(K);
    const std::vector<int> sup = support_indices(X);
    const int S = static_cast<int>(sup.size());
    for (int a = 0; a < S; ++a)
        for (int b = a; b < S; ++b)
            for (int c = b; c < S; ++c) {
                const double per = X.g(sup[a], sup[b]) + X.g(sup[b], sup[c]) + X.g(sup[a], sup[c]);
                if (per > bound) return false;
            }
    return true;
}

// Smallest support pair whose gauge value leaves the cos* domain, if any.
std::optional<std::pair<int, int>> first_bad_pair(const FiniteSpace& X, double K) {
    const double sq = std::sqrt(K);
    const std::vector<int> sup = support_indices(X);
    for (std::size_t a = 0; a < sup.size(); ++a)
        for (std::size_t b = a; b < sup.size(); ++b)
            if (sq * X.g(sup[a], sup[b]) > kPi / 2.0) return std::make_pair(sup[a], sup[b]);
    return std::nullopt;
}

}  // namespace

FunctionalValue eval_G(const FiniteSpace& X, double K, std::optional<MonteCarlo> mc, Backend backend) {
    if (K > 0.0 && !perimeter_ok(X, K)) return {kInf, std::nullopt, std::nullopt};
    EvalResult r = eval_polynomial(make_G_spec(K), X, mc, backend);
    return {r.value, r.stderr_est, std::nullopt};
}

FunctionalValue eval_H(const FiniteSpace& X, double K, std::optional<MonteCarlo> mc, Backend backend) {
    if (K > 0.0) {
        // cos* leaves its domain on some positive-mass pair: the integrand is
        // +inf on any quadruple whose cycle uses that pair.
        if (auto bad = first_bad_pair(X, K)) {
            FunctionalValue out;
            out.value = kInf;
            out.flagged_quadruple = std::array<int, 4>{bad->first, bad->second, bad->first, bad->second};
            return out;
        }
    }
    EvalResult r = eval_polynomial(make_H_spec(K), X, mc, backend);
    return {r.value, r.stderr_est, std::nullopt};
}

TangentVector gradient_G0(const FiniteSpace& X, Backend backend) {
    const int n = X.n;
    const std::vector<int> sup = support_indices(X);
    const int S = static_cast<int>(sup.size());
    std::vector<double> d2(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d2[static_cast<std::size_t>(i) * n + j] = X.g(i, j) * X.g(i, j);
    auto D2 = [&](int i, int j) { return d2[static_cast<std::size_t>(i) * n + j]; };

    std::vector<std::pair<int, int>> pairs;
    for (int y = 0; y < n; ++y)
        for (int z = y + 1; z < n; ++z) pairs.emplace_back(y, z);
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    parallel_for(static_cast<long long>(pairs.size()), backend, [&](long long k) {
        auto [y, z] = pairs[static_cast<std::size_t>(k)];
        double inner = 0.0;
        for (int a = 0; a < S; ++a) {
            const int w = sup[a];
            const double mw = X.w(w);
            for (int b = 0; b < S; ++b) {
                const int wp = sup[b];
                const double m = mw * X.w(wp);
                // apex-first triple gaps: A(apex; p,q,r)
                const double Ay = 3.0 * (D2(y, z) + D2(y, w) + D2(y, wp)) - (D2(z, w) + D2(z, wp) + D2(w, wp));
                const double Az = 3.0 * (D2(z, y) + D2(z, w) + D2(z, wp)) - (D2(y, w) + D2(y, wp) + D2(w, wp));
                const double Aw = 3.0 * (D2(w, y) + D2(w, z) + D2(w, wp)) - (D2(y, z) + D2(y, wp) + D2(z, wp));
                inner += m * (3.0 * zeta_prime(Ay) + 3.0 * zeta_prime(Az) - 2.0 * zeta_prime(Aw));
            }
        }
        const double val = 3.0 * X.g(y, z) * inner;
        g[static_cast<std::size_t>(y) * n + z] = val;
        g[static_cast<std::size_t>(z) * n + y] = val;
    });
    return make_tangent(n, std::move(g));
}

TangentVector gradient_H0(const FiniteSpace& X, Backend backend) {
    const int n = X.n;
    const std::vector<int> sup = support_indices(X);
    const int S = static_cast<int>(sup.size());
    std::vector<double> d2(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d2[static_cast<std::size_t>(i) * n + j] = X.g(i, j) * X.g(i, j);
    auto D2 = [&](int i, int j) { return d2[static_cast<std::size_t>(i) * n + j]; };

    std::vector<std::pair<int, int>> pairs;
    for (int y = 0; y < n; ++y)
        for (int z = y + 1; z < n; ++z) pairs.emplace_back(y, z);
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    parallel_for(static_cast<long long>(pairs.size()), backend, [&](long long k) {
        auto [y, z] = pairs[static_cast<std::size_t>(k)];
        double inner = 0.0;
        for (int a = 0; a < S; ++a) {
            const int w = sup[a];
            const double mw = X.w(w);
            for (int b = 0; b < S; ++b) {
                const int wp = sup[b];
                const double m = mw * X.w(wp);
                // cycle gap with (y,z) adjacent vs (y,z) diagonal
                const double C1 = D2(y, z) + D2(z, w) + D2(w, wp) + D2(wp, y) - D2(y, w) - D2(z, wp);
                const double C2 = D2(y, w) + D2(w, z) + D2(z, wp) + D2(wp, y) - D2(y, z) - D2(w, wp);
                inner += m * (2.0 * zeta_prime(C1) - zeta_prime(C2));
            }
        }
        const double val = 4.0 * X.g(y, z) * inner;
        g[static_cast<std::size_t>(y) * n + z] = val;
        g[static_cast<std::size_t>(z) * n + y] = val;
    });
    return make_tangent(n, std::move(g));
}

double eval_nested(const ScalarFn& U, const ScalarFn& eta, const FiniteSpace& X) {
    if (!U.f || !eta.f) throw InputError("eval_nested: missing callables");
    double total = 0.0;
    for (int i = 0; i < X.n; ++i) {
        if (X.w(i) == 0.0) continue;
        double inner = 0.0;
        for (int j = 0; j < X.n; ++j) inner += X.w(j) * eta.f(X.g(i, j));
        total += X.w(i) * U.f(inner);
    }
    return total;
}

TangentVector gradient_nested(const ScalarFn& U, const ScalarFn& eta, const FiniteSpace& X) {
    if (!U.f || !U.df || !eta.f || !eta.df) throw InputError("gradient_nested: missing derivative callables");
    const int n = X.n;
    std::vector<double> wval(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double inner = 0.0;
        for (int j = 0; j < n; ++j) inner += X.w(j) * eta.f(X.g(i, j));
        wval[static_cast<std::size_t>(i)] = inner;
    }
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            g[static_cast<std::size_t>(i) * n + j] =
                0.5 * (U.df(wval[static_cast<std::size_t>(i)]) + U.df(wval[static_cast<std::size_t>(j)])) *
                eta.df(X.g(i, j));
        }
    return make_tangent(n, std::move(g));
}

}  // namespace mmflow
