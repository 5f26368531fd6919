#include "mmflow/growthflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmflow/functionals.hpp"
#include "mmflow/parallel.hpp"

namespace mmflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

double simpson_slice(double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); }

template <class F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b, double fb, double m, double fm, double whole,
                            double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson_slice(fa, flm, fm, m - a);
    const double right = simpson_slice(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 40) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson_slice(fa, fm, fb, b - a);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// int_0^x sin^p / int_0^x sinh^p, closed through p = 2.
double sin_power_integral(double x, int p) {
    if (p == 0) return x;
    if (p == 1) return 1.0 - std::cos(x);
    if (p == 2) return 0.5 * (x - std::sin(x) * std::cos(x));
    return adaptive_simpson([p](double t) { return std::pow(std::sin(t), p); }, 0.0, x, 1e-12);
}

double sinh_power_integral(double x, int p) {
    if (p == 0) return x;
    if (p == 1) return std::cosh(x) - 1.0;
    if (p == 2) return 0.5 * (std::sinh(x) * std::cosh(x) - x);
    return adaptive_simpson([p](double t) { return std::pow(std::sinh(t), p); }, 0.0, x, 1e-12);
}

// Jump list of one point: sorted radii with cumulative strict-ball masses
// right after each jump; final mass snapped to 1 (weights sum to 1 up to fp).
struct Jumps {
    std::vector<double> r, c;
};

Jumps point_jumps(const FiniteSpace& X, int i) {
    std::vector<std::pair<double, double>> atoms;
    for (int k = 0; k < X.n; ++k)
        if (X.w(k) > 0.0) atoms.emplace_back(std::abs(X.g(i, k)), X.w(k));
    std::sort(atoms.begin(), atoms.end());
    Jumps j;
    double acc = 0.0;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        acc += atoms[a].second;
        if (!j.r.empty() && atoms[a].first == j.r.back()) {
            j.c.back() = acc;
        } else {
            j.r.push_back(atoms[a].first);
            j.c.push_back(acc);
        }
    }
    if (!j.c.empty() && std::abs(j.c.back() - 1.0) <= 1e-12) j.c.back() = 1.0;
    return j;
}

// value right after s: cumulative mass of jumps at radii <= s
double value_after(const Jumps& j, double s) {
    auto it = std::upper_bound(j.r.begin(), j.r.end(), s);
    if (it == j.r.begin()) return 0.0;
    return j.c[static_cast<std::size_t>(it - j.r.begin()) - 1];
}

std::vector<double> merge_radii(std::initializer_list<const std::vector<double>*> lists) {
    std::vector<double> out;
    for (const auto* l : lists) out.insert(out.end(), l->begin(), l->end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int> support_of(const FiniteSpace& X) {
    std::vector<int> sup;
    for (int i = 0; i < X.n; ++i)
        if (X.w(i) > 0.0) sup.push_back(i);
    return sup;
}

}  // namespace

void GrowthProfile::build_prefix() const {
    if (kind != Kind::step || prefix_.size() == radii.size()) return;
    prefix_.assign(radii.size(), 0.0);
    for (std::size_t j = 0; j + 1 < radii.size(); ++j)
        prefix_[j + 1] = prefix_[j] + values[j] * (radii[j + 1] - radii[j]);
}

double GrowthProfile::value(double r) const {
    if (r <= 0.0) return 0.0;
    if (kind == Kind::step) {
        auto it = std::lower_bound(radii.begin(), radii.end(), r);  // first >= r
        if (it == radii.begin()) return 0.0;
        return values[static_cast<std::size_t>(it - radii.begin()) - 1];
    }
    if (K > 0.0) {
        const double s = std::sqrt(K);
        const double x = std::min(s * r, kPi);
        return sin_power_integral(x, dim - 1) / sin_power_integral(kPi, dim - 1);
    }
    if (K == 0.0) {
        return std::min(std::pow(r / cap, dim), 1.0);
    }
    const double kp = std::sqrt(-K);
    return std::min(sinh_power_integral(kp * std::min(r, cap), dim - 1) / sinh_power_integral(kp * cap, dim - 1), 1.0);
}

double GrowthProfile::integral_to(double r) const {
    if (r <= 0.0) return 0.0;
    if (kind == Kind::step) {
        build_prefix();
        auto it = std::lower_bound(radii.begin(), radii.end(), r);
        if (it == radii.begin()) return 0.0;
        const std::size_t j = static_cast<std::size_t>(it - radii.begin()) - 1;
        return prefix_[j] + values[j] * (r - radii[j]);
    }
    const double sat = saturation_radius();
    const double head = std::min(r, sat);
    double acc = adaptive_simpson([this](double t) { return value(t); }, 0.0, head, 1e-10);
    if (r > sat) acc += r - sat;
    return acc;
}

double GrowthProfile::saturation_radius() const {
    if (kind == Kind::step) return radii.empty() ? 0.0 : radii.back();
    if (K > 0.0) return kPi / std::sqrt(K);
    return cap;
}

GrowthProfile make_step_profile(std::vector<double> radii, std::vector<double> values) {
    if (radii.empty() || radii.size() != values.size())
        throw InputError("make_step_profile: need matching nonempty radius/value lists");
    if (radii.front() < 0.0) throw InputError("make_step_profile: negative radius");
    for (std::size_t j = 0; j + 1 < radii.size(); ++j)
        if (!(radii[j] < radii[j + 1])) throw InputError("make_step_profile: radii must be strictly increasing");
    double prev = 0.0;
    for (double v : values) {
        if (v < prev - 1e-12 || v > 1.0 + 1e-9) throw InputError("make_step_profile: values must be nondecreasing in [0,1]");
        prev = v;
    }
    if (std::abs(values.back() - 1.0) > 1e-9) throw InputError("make_step_profile: profile must saturate at 1");
    values.back() = 1.0;
    GrowthProfile p;
    p.kind = GrowthProfile::Kind::step;
    p.radii = std::move(radii);
    p.values = std::move(values);
    p.integral_to(0.0);  // build prefix now; lazily building from parallel loops would race
    return p;
}

GrowthProfile profile_from_space(const FiniteSpace& X) {
    BalancedReport b = is_balanced(X, 1e-12);
    if (b.balanced) return *b.profile;
    const std::vector<int> sup = support_of(X);
    std::vector<Jumps> pts;
    pts.reserve(sup.size());
    for (int i : sup) pts.push_back(point_jumps(X, i));
    std::vector<double> merged;
    for (const auto& j : pts) merged.insert(merged.end(), j.r.begin(), j.r.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    std::vector<double> avg(merged.size(), 0.0);
    for (std::size_t k = 0; k < merged.size(); ++k) {
        double acc = 0.0;
        for (std::size_t a = 0; a < pts.size(); ++a) acc += X.w(sup[a]) * value_after(pts[a], merged[k]);
        avg[k] = acc;
    }
    return make_step_profile(std::move(merged), std::move(avg));
}

GrowthProfile model_profile_constant_curvature(int dim, double K, std::optional<double> cap) {
    if (dim < 1) throw InputError("model_profile_constant_curvature: dimension must be >= 1");
    GrowthProfile p;
    p.kind = GrowthProfile::Kind::constant_curvature;
    p.dim = dim;
    p.K = K;
    if (K > 0.0) {
        p.cap = kPi / std::sqrt(K);
    } else {
        if (!cap || *cap <= 0.0)
            throw InputError("model_profile_constant_curvature: K <= 0 needs a positive cap radius");
        p.cap = *cap;
    }
    return p;
}

double WeightFunction::rho(double r) const {
    switch (kind) {
        case Kind::exponential:
            return r < 0.0 ? 0.0 : lambda * std::exp(-lambda * r);
        case Kind::truncated_uniform:
            return (r >= 0.0 && r <= R) ? 1.0 / R : 0.0;
        case Kind::custom: {
            if (r < table_r.front() || r >= table_r.back()) return 0.0;
            auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
            return table_rho[static_cast<std::size_t>(it - table_r.begin()) - 1];
        }
    }
    return 0.0;
}

double WeightFunction::rho_bar(double a) const {
    if (a < 0.0) a = 0.0;
    switch (kind) {
        case Kind::exponential:
            return std::exp(-lambda * a);
        case Kind::truncated_uniform:
            return a >= R ? 0.0 : (R - a) / R;
        case Kind::custom: {
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < table_r.size(); ++k) {
                const double lo = std::max(a, table_r[k]);
                const double hi = table_r[k + 1];
                if (hi > lo) acc += table_rho[k] * (hi - lo);
            }
            return acc;
        }
    }
    return 0.0;
}

double WeightFunction::int_rho_bar(double a, double b) const {
    if (a < 0.0) a = 0.0;
    if (!(b > a)) return 0.0;
    switch (kind) {
        case Kind::exponential: {
            if (std::isinf(b)) return std::exp(-lambda * a) / lambda;
            return (std::exp(-lambda * a) - std::exp(-lambda * b)) / lambda;
        }
        case Kind::truncated_uniform: {
            const double ap = std::min(a, R), bp = std::min(b, R);
            // antiderivative of (R-r)/R is -(R-r)^2/(2R)
            return ((R - ap) * (R - ap) - (R - bp) * (R - bp)) / (2.0 * R);
        }
        case Kind::custom: {
            const double end = table_r.back();
            const double bp = std::min(b, end);
            if (!(bp > a)) return 0.0;
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < table_r.size(); ++k) {
                const double lo = std::max(a, table_r[k]);
                const double hi = std::min(bp, table_r[k + 1]);
                if (hi > lo) acc += 0.5 * (rho_bar(lo) + rho_bar(hi)) * (hi - lo);  // rho_bar linear here
            }
            return acc;
        }
    }
    return 0.0;
}

double WeightFunction::int_r_rho() const {
    switch (kind) {
        case Kind::exponential:
            return 1.0 / lambda;
        case Kind::truncated_uniform:
            return 0.5 * R;
        case Kind::custom: {
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < table_r.size(); ++k)
                acc += 0.5 * table_rho[k] * (table_r[k + 1] * table_r[k + 1] - table_r[k] * table_r[k]);
            return acc;
        }
    }
    return 0.0;
}

double WeightFunction::kappa() const {
    switch (kind) {
        case Kind::exponential:
            return -std::exp(-1.0);  // sup of r*lambda*e^{-lambda r} at r = 1/lambda
        case Kind::truncated_uniform:
            return -1.0;  // sup of r/R at r = R
        case Kind::custom: {
            double sup = 0.0;
            for (std::size_t k = 0; k + 1 < table_r.size(); ++k)
                sup = std::max(sup, table_rho[k] * table_r[k + 1]);
            return -sup;
        }
    }
    return 0.0;
}

namespace {

// 1 - (1+a)e^{-a} and 2 - (2+2a+a^2)e^{-a}: series below a = 1 where the
// closed forms cancel.
double exp_g1(double a) {
    if (std::isinf(a)) return 1.0;
    if (a >= 1.0) return 1.0 - (1.0 + a) * std::exp(-a);
    double acc = 0.0, pow_fact = a;  // a^k / k!
    for (int k = 2; k <= 40; ++k) {
        pow_fact *= a / k;
        const double term = (k % 2 == 0 ? 1.0 : -1.0) * pow_fact * (k - 1);
        acc += term;
        if (std::abs(term) < 1e-18 * (std::abs(acc) + 1e-300)) break;
    }
    return acc;
}

double exp_g2(double a) {
    if (std::isinf(a)) return 2.0;
    if (a >= 1.0) return 2.0 - (2.0 + 2.0 * a + a * a) * std::exp(-a);
    double acc = 0.0, pow_fact = a * a / 2.0;
    for (int k = 3; k <= 40; ++k) {
        pow_fact *= a / k;
        const double term = (k % 2 == 1 ? 1.0 : -1.0) * pow_fact * (k - 1) * (k - 2);
        acc += term;
        if (std::abs(term) < 1e-18 * (std::abs(acc) + 1e-300)) break;
    }
    return acc;
}

}  // namespace

void WeightFunction::moments(double s, double L, double& m0, double& m1, double& m2) const {
    m0 = m1 = m2 = 0.0;
    if (!(L > 0.0)) return;
    switch (kind) {
        case Kind::exponential: {
            const double es = std::exp(-lambda * s);
            const double a = lambda * L;
            m0 = es * -std::expm1(-a);
            m1 = es * exp_g1(a) / lambda;
            m2 = es * exp_g2(a) / (lambda * lambda);
            return;
        }
        case Kind::truncated_uniform: {
            const double hi = std::min(L, R - s);
            if (hi <= 0.0) return;
            m0 = hi / R;
            m1 = hi * hi / (2.0 * R);
            m2 = hi * hi * hi / (3.0 * R);
            return;
        }
        case Kind::custom: {
            for (std::size_t k = 0; k + 1 < table_r.size(); ++k) {
                const double lo = std::max(s, table_r[k]);
                const double hi = std::min(s + L, table_r[k + 1]);
                if (hi <= lo) continue;
                const double t0 = lo - s, t1 = hi - s;
                m0 += table_rho[k] * (t1 - t0);
                m1 += table_rho[k] * 0.5 * (t1 * t1 - t0 * t0);
                m2 += table_rho[k] * (t1 * t1 * t1 - t0 * t0 * t0) / 3.0;
            }
            return;
        }
    }
}

WeightFunction make_exponential_weight(double lambda) {
    if (!(lambda > 0.0)) throw InputError("make_exponential_weight: lambda must be positive");
    WeightFunction w;
    w.kind = WeightFunction::Kind::exponential;
    w.lambda = lambda;
    return w;
}

WeightFunction make_truncated_uniform_weight(double R) {
    if (!(R > 0.0)) throw InputError("make_truncated_uniform_weight: R must be positive");
    WeightFunction w;
    w.kind = WeightFunction::Kind::truncated_uniform;
    w.R = R;
    return w;
}

WeightFunction make_custom_weight(std::vector<double> r, std::vector<double> rho) {
    if (r.size() < 2 || r.size() != rho.size() + 1)
        throw InputError("make_custom_weight: need k+1 breakpoints for k density values");
    if (r.front() != 0.0) throw InputError("make_custom_weight: table must start at r = 0");
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
        if (!(r[k] < r[k + 1])) throw InputError("make_custom_weight: breakpoints must increase");
        if (rho[k] < 0.0) throw InputError("make_custom_weight: negative density");
    }
    WeightFunction w;
    w.kind = WeightFunction::Kind::custom;
    w.table_r = std::move(r);
    w.table_rho = std::move(rho);
    return w;
}

double volume_growth(const FiniteSpace& X, int i, double r) {
    if (i < 0 || i >= X.n) throw InputError("volume_growth: point index out of range");
    if (r < 0.0) throw InputError("volume_growth: radius must be nonnegative");
    double acc = 0.0;
    for (int k = 0; k < X.n; ++k)
        if (std::abs(X.g(i, k)) < r) acc += X.w(k);
    return acc;
}

BalancedReport is_balanced(const FiniteSpace& X, double tol) {
    const std::vector<int> sup = support_of(X);
    std::vector<Jumps> pts;
    pts.reserve(sup.size());
    for (int i : sup) pts.push_back(point_jumps(X, i));

    std::vector<double> all;
    for (const auto& j : pts) all.insert(all.end(), j.r.begin(), j.r.end());
    std::sort(all.begin(), all.end());
    // cluster radii within tol; compare cumulative masses at each cluster top
    std::vector<double> reps;
    for (double r : all) {
        if (reps.empty() || r - reps.back() > tol) reps.push_back(r);
        else reps.back() = r;
    }
    for (double rep : reps) {
        double lo = kInf, hi = -kInf;
        for (const auto& j : pts) {
            const double c = value_after(j, rep);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        if (hi - lo > tol) return {false, std::nullopt};
    }
    BalancedReport rep;
    rep.balanced = true;
    rep.profile = make_step_profile(pts.front().r, pts.front().c);
    return rep;
}

namespace {

// One point's contribution to 2F: int_0^oo [int_0^r (v_t - v*_t) dt]^2 rho_r dr.
double point_F_term(const GrowthProfile& model, const WeightFunction& rho, const Jumps& jx) {
    if (model.is_step()) {
        const std::vector<double> merged = merge_radii({&jx.r, &model.radii});
        double acc = 0.0, w = 0.0;
        for (std::size_t k = 0; k < merged.size(); ++k) {
            const double s = merged[k];
            const double u = value_after(jx, s) - model.value(std::nextafter(s, kInf));
            if (k + 1 < merged.size()) {
                const double L = merged[k + 1] - s;
                double m0, m1, m2;
                rho.moments(s, L, m0, m1, m2);
                acc += w * w * m0 + 2.0 * w * u * m1 + u * u * m2;
                w += u * L;
            } else {
                double m0, m1, m2;
                rho.moments(s, kInf, m0, m1, m2);
                acc += w * w * m0 + 2.0 * w * u * m1 + u * u * m2;
            }
        }
        return acc;
    }
    // smooth model: integrate (A(r) - V*(r))^2 rho between kinks, constant tail
    const double sat = model.saturation_radius();
    std::vector<double> satv{sat};
    const std::vector<double> merged = merge_radii({&jx.r, &satv});
    double acc = 0.0, A = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < merged.size(); ++k) {
        const double s = merged[k];
        const double v = value_after(jx, prev);  // constant on (prev, s]
        const double A0 = A, s0 = prev;
        acc += adaptive_simpson(
            [&](double r) {
                const double wv = A0 + v * (r - s0) - model.integral_to(r);
                return wv * wv * rho.rho(r);
            },
            prev, s, 1e-8);
        A += v * (s - prev);
        prev = s;
    }
    const double c = A - model.integral_to(prev);  // both curves grow at slope 1 past here
    acc += c * c * rho.rho_bar(prev);
    return acc;
}

}  // namespace

double eval_F(const FiniteSpace& X, const GrowthProfile& model, const WeightFunction& rho, Backend backend) {
    model.integral_to(0.0);  // touch lazy state before parallel use
    const std::vector<int> sup = support_of(X);
    std::vector<Jumps> pts(sup.size());
    parallel_for(static_cast<long long>(sup.size()), backend,
                 [&](long long a) { pts[static_cast<std::size_t>(a)] = point_jumps(X, sup[static_cast<std::size_t>(a)]); });
    const double total = parallel_sum(static_cast<long long>(sup.size()), backend, [&](long long a) {
        return X.w(sup[static_cast<std::size_t>(a)]) * point_F_term(model, rho, pts[static_cast<std::size_t>(a)]);
    });
    return 0.5 * total;
}

namespace {

double pair_grad_entry(const GrowthProfile& model, const WeightFunction& rho, const Jumps& jx,
                       const Jumps& jy, double d) {
    std::vector<double> satv;
    std::vector<double> merged;
    if (model.is_step()) {
        merged = merge_radii({&jx.r, &jy.r, &model.radii});
    } else {
        satv.push_back(model.saturation_radius());
        merged = merge_radii({&jx.r, &jy.r, &satv});
    }

    double A_mean = 0.0;   // int_0^d of (v(x)+v(y))/2
    double term2 = 0.0;    // int_d^oo (mean - v*) rho_bar
    for (std::size_t k = 0; k < merged.size(); ++k) {
        const double s = merged[k];
        const double hi = (k + 1 < merged.size()) ? merged[k + 1] : kInf;
        const double mean = 0.5 * (value_after(jx, s) + value_after(jy, s));
        if (hi <= d) {
            A_mean += mean * (hi - s);
            continue;
        }
        if (s < d) A_mean += mean * (d - s);
        const double lo = std::max(s, d);
        if (model.is_step()) {
            const double u = mean - model.value(std::nextafter(s, kInf));
            term2 += u * rho.int_rho_bar(lo, hi);
        } else if (std::isinf(hi)) {
            // past the last kink v* is saturated at 1
            term2 += (mean - 1.0) * rho.int_rho_bar(lo, hi);
        } else {
            // v* varies inside the segment
            term2 += mean * rho.int_rho_bar(lo, hi);
            term2 -= adaptive_simpson([&](double r) { return model.value(r) * rho.rho_bar(r); }, lo, hi, 1e-10);
        }
    }
    // beyond the last jump both mean and v* sit at 1, so the integrand is 0
    // there for step models; the smooth branch ends at max(jumps, saturation)
    // with the same cancellation.
    const double term1 = rho.rho_bar(d) * (A_mean - model.integral_to(d));
    return term1 + term2;
}

}  // namespace

TangentVector grad_minus_F(const FiniteSpace& X, const GrowthProfile& model, const WeightFunction& rho,
                           Backend backend) {
    model.integral_to(0.0);
    const int n = X.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (X.g(i, j) < 0.0)
                throw PreconditionError("grad_minus_F: negative gauge entry; the flow lives on nonnegative gauges");
    std::vector<Jumps> pts(static_cast<std::size_t>(n));
    parallel_for(n, backend, [&](long long i) { pts[static_cast<std::size_t>(i)] = point_jumps(X, static_cast<int>(i)); });

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    parallel_for(static_cast<long long>(pairs.size()), backend, [&](long long k) {
        auto [i, j] = pairs[static_cast<std::size_t>(k)];
        const double val = pair_grad_entry(model, rho, pts[static_cast<std::size_t>(i)],
                                           pts[static_cast<std::size_t>(j)], X.g(i, j));
        g[static_cast<std::size_t>(i) * n + j] = val;
        g[static_cast<std::size_t>(j) * n + i] = val;
    });
    return make_tangent(n, std::move(g));
}

TangentVector grad_minus_F_tilde(const FiniteSpace& X, const GrowthProfile& model, const WeightFunction& rho) {
    const int n = X.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (X.g(i, j) < 0.0)
                throw PreconditionError("grad_minus_F_tilde: negative gauge entry");
    std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = X.g(i, j);
            const double mean = 0.5 * (volume_growth(X, i, d) + volume_growth(X, j, d));
            g[static_cast<std::size_t>(i) * n + j] = (mean - model.value(d)) * rho.rho(d);
        }
    return make_tangent(n, std::move(g));
}

namespace {

bool is_uniform_weights(const FiniteSpace& X) {
    const double target = 1.0 / X.n;
    for (int i = 0; i < X.n; ++i)
        if (std::abs(X.w(i) - target) > 1e-12) return false;
    return true;
}

long long clamp_negatives(std::vector<double>& gauge, int n) {
    long long events = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            auto& a = gauge[static_cast<std::size_t>(i) * n + j];
            auto& b = gauge[static_cast<std::size_t>(j) * n + i];
            if (a < 0.0) {
                a = 0.0;
                b = 0.0;
                ++events;
            }
        }
    return events;
}

}  // namespace

FlowTrajectory flow(const FiniteSpace& X0, const GrowthProfile& model, const WeightFunction& rho,
                    const FlowOptions& opt) {
    if (!is_uniform_weights(X0)) throw InputError("flow: weights must be uniform");
    if (!(opt.dt > 0.0)) throw InputError("flow: dt must be positive");
    if (opt.steps < 0) throw InputError("flow: negative step count");
    const int n = X0.n;
    model.integral_to(0.0);

    FiniteSpace work = X0;
    auto rhs = [&](const std::vector<double>& gauge) {
        work.gauge = gauge;
        TangentVector t = grad_minus_F(work, model, rho, opt.backend);
        if (opt.with_G) {
            TangentVector gk = (opt.K == 0.0) ? gradient_G0(work, opt.backend)
                                              : ambient_gradient_polynomial(make_G_spec(opt.K), work, opt.backend);
            for (std::size_t a = 0; a < t.g.size(); ++a) t.g[a] -= gk.g[a];
        }
        return t;
    };

    FlowTrajectory traj;
    traj.n = n;
    std::vector<double> gauge = X0.gauge;
    long long clamps_since_record = 0;

    auto record = [&](long long step_idx) {
        work.gauge = gauge;
        FlowStep rec;
        rec.t = static_cast<double>(step_idx) * opt.dt;
        rec.gauge = gauge;
        rec.F = eval_F(work, model, rho, opt.backend);
        if (opt.with_G) rec.G = eval_G(work, opt.K, std::nullopt, opt.backend).value;
        rec.triangle_defect = triangle_defect(work);
        rec.clamp_events = clamps_since_record;
        clamps_since_record = 0;
        traj.steps.push_back(std::move(rec));
    };

    record(0);
    const long long stride = std::max<long long>(1, opt.save_stride);
    for (long long k = 0; k < opt.steps; ++k) {
        if (opt.integrator == Integrator::euler) {
            TangentVector d1 = rhs(gauge);
            for (std::size_t a = 0; a < gauge.size(); ++a) gauge[a] += opt.dt * d1.g[a];
        } else {
            const double h = opt.dt;
            TangentVector k1 = rhs(gauge);
            std::vector<double> stage = gauge;
            for (std::size_t a = 0; a < stage.size(); ++a) stage[a] = gauge[a] + 0.5 * h * k1.g[a];
            clamp_negatives(stage, n);
            TangentVector k2 = rhs(stage);
            for (std::size_t a = 0; a < stage.size(); ++a) stage[a] = gauge[a] + 0.5 * h * k2.g[a];
            clamp_negatives(stage, n);
            TangentVector k3 = rhs(stage);
            for (std::size_t a = 0; a < stage.size(); ++a) stage[a] = gauge[a] + h * k3.g[a];
            clamp_negatives(stage, n);
            TangentVector k4 = rhs(stage);
            for (std::size_t a = 0; a < gauge.size(); ++a)
                gauge[a] += h / 6.0 * (k1.g[a] + 2.0 * k2.g[a] + 2.0 * k3.g[a] + k4.g[a]);
        }
        clamps_since_record += clamp_negatives(gauge, n);
        for (double v : gauge)
            if (!std::isfinite(v))
                throw PreconditionError("flow: non-finite gauge entry after step " + std::to_string(k + 1) +
                                        "; reduce dt");
        if ((k + 1) % stride == 0 || k + 1 == opt.steps) record(k + 1);
    }
    return traj;
}

ContractionReport contraction_check(const FiniteSpace& X0, const FiniteSpace& X0p, const GrowthProfile& model,
                                    const WeightFunction& rho, double T, double dt, const SolverConfig& cfg,
                                    Backend backend) {
    if (!(T > 0.0) || !(dt > 0.0)) throw InputError("contraction_check: need positive T and dt");
    FlowOptions opt;
    opt.dt = dt;
    opt.steps = std::max<long long>(1, std::llround(T / dt));
    opt.save_stride = opt.steps;
    opt.backend = backend;
    const double Teff = static_cast<double>(opt.steps) * dt;

    FlowTrajectory ta = flow(X0, model, rho, opt);
    FlowTrajectory tb = flow(X0p, model, rho, opt);
    FiniteSpace XT = X0, XTp = X0p;
    XT.gauge = ta.steps.back().gauge;
    XTp.gauge = tb.steps.back().gauge;

    DistResult d0 = dist(X0, X0p, 2.0, cfg, SolverChoice::automatic, backend);
    DistResult dT = dist(XT, XTp, 2.0, cfg, SolverChoice::automatic, backend);

    ContractionReport rep;
    rep.kappa = rho.kappa();
    rep.bound_factor = std::exp(std::abs(rep.kappa) * Teff);
    rep.d0_lower = d0.lower;
    rep.d0_upper = d0.upper;
    rep.dT_lower = dT.lower;
    rep.dT_upper = dT.upper;
    rep.certified0 = d0.certified;
    rep.certifiedT = dT.certified;
    if (!d0.certified || !dT.certified) {
        rep.verdict = Verdict::INCONCLUSIVE;
        return rep;
    }
    if (d0.lower <= 1e-15) {
        rep.ratio = dT.upper <= 1e-12 ? 0.0 : kInf;
    } else {
        rep.ratio = dT.upper / d0.lower;
    }
    rep.verdict = (rep.ratio <= rep.bound_factor * (1.0 + 1e-3)) ? Verdict::PASS : Verdict::FAIL;
    return rep;
}

}  // namespace mmflow
