#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mmflow/growthflow.hpp"
#include "mmflow/space.hpp"
#include "test_util.hpp"

using namespace mmflow;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Adaptive Simpson, local to the tests so the library's quadrature is not
// trusted to check itself.
template <typename F>
double simpson(F&& f, double a, double b, double tol = 1e-11, int depth = 32) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    struct Rec {
        double a, b, fa, fm, fb, whole, tol;
        int depth;
    };
    std::vector<Rec> stack{{a, b, fa, fm, fb, whole, tol, depth}};
    double acc = 0.0;
    while (!stack.empty()) {
        Rec r = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (r.a + r.b);
        const double lm = 0.5 * (r.a + mid), rm = 0.5 * (mid + r.b);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - r.a) / 6.0 * (r.fa + 4.0 * flm + r.fm);
        const double right = (r.b - mid) / 6.0 * (r.fm + 4.0 * frm + r.fb);
        if (r.depth <= 0 || std::fabs(left + right - r.whole) <= 15.0 * r.tol) {
            acc += left + right + (left + right - r.whole) / 15.0;
        } else {
            stack.push_back({r.a, mid, r.fa, flm, r.fm, left, 0.5 * r.tol, r.depth - 1});
            stack.push_back({mid, r.b, r.fm, frm, r.fb, right, 0.5 * r.tol, r.depth - 1});
        }
    }
    return acc;
}

// Independent F oracle: per point, piecewise integration of u(r)^2 rho(r)
// between breakpoints, with u(r) = int_0^r v_t(x) dt - model.integral_to(r)
// assembled from volume_growth probes only.
double oracle_F(const FiniteSpace& X, const GrowthProfile& model, const WeightFunction& rho,
                double r_max) {
    std::set<double> cuts;
    cuts.insert(0.0);
    cuts.insert(r_max);
    for (int i = 0; i < X.n; ++i)
        for (int j = 0; j < X.n; ++j) cuts.insert(std::fabs(X.g(i, j)));
    if (model.is_step())
        for (double r : model.radii) cuts.insert(r);
    else
        cuts.insert(model.saturation_radius());
    std::vector<double> bp(cuts.begin(), cuts.end());

    double total = 0.0;
    for (int x = 0; x < X.n; ++x) {
        if (X.w(x) == 0.0) continue;
        // V(r) = int_0^r v_t(x) dt accumulated left to right.
        double Vlo = 0.0;
        double point = 0.0;
        for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
            const double lo = bp[k], hi = std::min(bp[k + 1], r_max);
            if (hi <= lo) continue;
            const double v = volume_growth(X, x, 0.5 * (lo + hi));  // constant on (lo, hi)
            const double Vbase = Vlo;
            auto u = [&](double r) { return Vbase + v * (r - lo) - model.integral_to(r); };
            point += simpson([&](double r) { return u(r) * u(r) * rho.rho(r); }, lo, hi);
            Vlo += v * (hi - lo);
        }
        // Beyond r_max both growths sit at 1, u is frozen.
        const double uend = Vlo - model.integral_to(r_max);
        point += uend * uend * rho.rho_bar(r_max);
        total += X.w(x) * point;
    }
    return 0.5 * total;
}

}  // namespace

TEST_CASE("weight functions: closed moments against quadrature") {
    auto exp1 = make_exponential_weight(1.3);
    auto unif = make_truncated_uniform_weight(2.5);
    auto table = make_custom_weight({0.0, 1.0, 2.0}, {0.4, 0.1});
    for (const auto& w : {exp1, unif, table}) {
        // rho_bar is the tail integral of rho.
        for (double a : {0.0, 0.3, 1.1, 2.2}) {
            double tail = simpson([&](double r) { return w.rho(r); }, a, 3.0) + w.rho_bar(3.0);
            CHECK(w.rho_bar(a) == doctest::Approx(tail).epsilon(1e-9));
        }
        // int_rho_bar on finite windows.
        double got = w.int_rho_bar(0.2, 1.7);
        double want = simpson([&](double r) { return w.rho_bar(r); }, 0.2, 1.7);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
        // Moments at several offsets and lengths.
        for (double s : {0.0, 0.4, 1.2})
            for (double L : {0.3, 1.0, 2.0}) {
                double m0, m1, m2;
                w.moments(s, L, m0, m1, m2);
                CHECK(m0 == doctest::Approx(simpson([&](double t) { return w.rho(s + t); }, 0.0, L))
                                .epsilon(1e-8));
                CHECK(m1 ==
                      doctest::Approx(simpson([&](double t) { return t * w.rho(s + t); }, 0.0, L))
                          .epsilon(1e-8));
                CHECK(m2 == doctest::Approx(
                                simpson([&](double t) { return t * t * w.rho(s + t); }, 0.0, L))
                                .epsilon(1e-8));
            }
    }
    // Infinite windows.
    double m0, m1, m2;
    exp1.moments(0.5, kInf, m0, m1, m2);
    CHECK(m0 == doctest::Approx(exp1.rho_bar(0.5)).epsilon(1e-12));
    CHECK(exp1.int_rho_bar(0.3, kInf) ==
          doctest::Approx(simpson([&](double r) { return exp1.rho_bar(r); }, 0.3, 30.0))
              .epsilon(1e-9));
    CHECK(exp1.int_r_rho() == doctest::Approx(1.0 / 1.3).epsilon(1e-12));
    CHECK(unif.int_r_rho() == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("exponential moment series vs closed forms across the switch") {
    // The g1/g2 helpers switch between series and closed forms near a = 1;
    // quadrature pins both sides of the seam.
    for (double lambda : {1.0, 3.0})
        for (double L : {1e-4, 0.2, 0.9, 0.999, 1.001, 1.2, 5.0}) {
            auto w = make_exponential_weight(lambda);
            double m0, m1, m2;
            w.moments(0.0, L / lambda, m0, m1, m2);  // a = lambda * L spans the seam
            CHECK(m1 ==
                  doctest::Approx(simpson([&](double t) { return t * w.rho(t); }, 0.0, L / lambda))
                      .epsilon(1e-8));
            CHECK(m2 == doctest::Approx(
                            simpson([&](double t) { return t * t * w.rho(t); }, 0.0, L / lambda))
                            .epsilon(1e-8));
        }
}

TEST_CASE("kappa is -sup r*rho(r), checked on a grid") {
    auto exp2 = make_exponential_weight(2.0);
    double sup = 0.0;
    for (double r = 0.0; r <= 20.0; r += 1e-4) sup = std::max(sup, r * exp2.rho(r));
    CHECK(exp2.kappa() == doctest::Approx(-sup).epsilon(1e-6));
    CHECK(exp2.kappa() == doctest::Approx(-std::exp(-1.0)).epsilon(1e-12));

    auto unif = make_truncated_uniform_weight(3.0);
    sup = 0.0;
    for (double r = 0.0; r <= 3.0; r += 1e-5) sup = std::max(sup, r * unif.rho(r));
    CHECK(unif.kappa() == doctest::Approx(-1.0).epsilon(1e-4));

    auto table = make_custom_weight({0.0, 1.0, 2.5}, {0.2, 0.3});
    CHECK(table.kappa() == doctest::Approx(-0.75).epsilon(1e-12));
}

TEST_CASE("weight validation") {
    CHECK_THROWS_AS(make_exponential_weight(0.0), InputError);
    CHECK_THROWS_AS(make_truncated_uniform_weight(-1.0), InputError);
    CHECK_THROWS_AS(make_custom_weight({0.5, 1.0}, {1.0}), InputError);       // first != 0
    CHECK_THROWS_AS(make_custom_weight({0.0, 1.0}, {-0.2}), InputError);      // negative
    CHECK_THROWS_AS(make_custom_weight({0.0, 1.0, 0.5}, {1.0, 1.0}), InputError);
}

TEST_CASE("volume_growth uses strict balls") {
    auto K4 = make_complete_graph(4);
    CHECK(volume_growth(K4, 0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(volume_growth(K4, 0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));  // strict
    CHECK(volume_growth(K4, 0, 1.0 + 1e-12) == doctest::Approx(1.0).epsilon(1e-15));
    auto C = make_discrete_circle(4);
    CHECK(volume_growth(C, 2, 1.5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(volume_growth(K4, 7, 1.0), InputError);
    CHECK_THROWS_AS(volume_growth(K4, 0, -1.0), InputError);
}

TEST_CASE("step profiles: value, integral, validation") {
    auto p = make_step_profile({0.0, 1.0, 2.0}, {0.25, 0.625, 1.0});
    CHECK(p.value(0.5) == 0.25);
    CHECK(p.value(1.0) == 0.25);  // left continuous
    CHECK(p.value(1.5) == 0.625);
    CHECK(p.value(5.0) == 1.0);
    CHECK(p.integral_to(0.5) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(p.integral_to(1.5) == doctest::Approx(0.25 + 0.5 * 0.625).epsilon(1e-15));
    // Additivity across segments.
    CHECK(p.integral_to(3.0) - p.integral_to(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.saturation_radius() == 2.0);
    CHECK_THROWS_AS(make_step_profile({1.0, 0.5}, {0.5, 1.0}), InputError);   // radii order
    CHECK_THROWS_AS(make_step_profile({0.0, 1.0}, {0.8, 0.5}), InputError);   // decreasing
    CHECK_THROWS_AS(make_step_profile({0.0, 1.0}, {0.5, 0.7}), InputError);   // last != 1
}

TEST_CASE("profile_from_space: balanced and averaged") {
    auto rep = is_balanced(make_complete_graph(4));
    REQUIRE(rep.balanced);
    REQUIRE(rep.profile.has_value());
    CHECK(rep.profile->value(0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(rep.profile->value(1.5) == 1.0);

    CHECK(is_balanced(make_discrete_circle(4)).balanced);
    CHECK_FALSE(is_balanced(make_star(3)).balanced);
    // Jitter below tolerance still counts as balanced.
    auto K = make_complete_graph(4);
    std::vector<double> g = K.gauge;
    g[0 * 4 + 1] += 5e-10;
    g[1 * 4 + 0] += 5e-10;
    CHECK(is_balanced(make_space(4, g, K.weights), 1e-8).balanced);

    // Tripod average: center profile (1/4, then 1) with weight 1/4, leaves
    // (1/4, 1/2, 1) with weight 3/4.
    auto avg = profile_from_space(make_star(3));
    CHECK(avg.value(0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(avg.value(1.5) == doctest::Approx(0.25 * 1.0 + 0.75 * 0.5).epsilon(1e-15));
    CHECK(avg.value(2.5) == 1.0);
}

TEST_CASE("constant-curvature profiles") {
    // dim 1, K = 1: linear growth up to pi.
    auto s1 = model_profile_constant_curvature(1, 1.0);
    CHECK(s1.saturation_radius() == doctest::Approx(3.14159265358979312).epsilon(1e-15));
    CHECK(s1.value(3.14159265358979312 / 2.0) == doctest::Approx(0.5).epsilon(1e-12));
    // dim 2, K = 1: (1 - cos r)/2.
    auto s2 = model_profile_constant_curvature(2, 1.0);
    CHECK(s2.value(1.0) == doctest::Approx((1.0 - std::cos(1.0)) / 2.0).epsilon(1e-12));
    CHECK(s2.value(10.0) == 1.0);
    // Euclidean dim 2 with cap: (r/cap)^2.
    auto e2 = model_profile_constant_curvature(2, 0.0, 2.0);
    CHECK(e2.value(1.0) == doctest::Approx(0.25).epsilon(1e-12));
    // Hyperbolic needs a cap; with one, growth is sinh-weighted.
    CHECK_THROWS_AS(model_profile_constant_curvature(2, -1.0), InputError);
    auto h2 = model_profile_constant_curvature(2, -1.0, 2.0);
    CHECK(h2.value(1.0) ==
          doctest::Approx((std::cosh(1.0) - 1.0) / (std::cosh(2.0) - 1.0)).epsilon(1e-10));
    // integral_to agrees with quadrature of value().
    for (const auto& m : {s1, s2, e2, h2}) {
        double want = simpson([&](double r) { return m.value(r); }, 0.0, 2.0);
        CHECK(m.integral_to(2.0) == doctest::Approx(want).epsilon(1e-8));
    }
    CHECK_THROWS_AS(model_profile_constant_curvature(0, 1.0), InputError);
}

TEST_CASE("eval_F matches the independent oracle") {
    auto circle = profile_from_space(make_discrete_circle(4));
    auto sphere2 = model_profile_constant_curvature(2, 1.0);
    auto expw = make_exponential_weight(1.0);
    auto unifw = make_truncated_uniform_weight(3.0);

    struct Case {
        FiniteSpace X;
        const GrowthProfile* model;
        const WeightFunction* w;
        double r_max;
    };
    auto tripod = make_star(3);
    auto K4 = make_complete_graph(4);
    auto rand5 = testutil::random_euclidean_space(5, 2, 99);
    std::vector<Case> cases = {
        {K4, &circle, &expw, 50.0},      {tripod, &circle, &expw, 50.0},
        {tripod, &circle, &unifw, 3.0},  {rand5, &sphere2, &expw, 50.0},
        {rand5, &circle, &unifw, 3.0},   {K4, &sphere2, &unifw, 3.0},
    };
    for (const auto& c : cases) {
        double got = eval_F(c.X, *c.model, *c.w);
        double want = oracle_F(c.X, *c.model, *c.w, c.r_max);
        CHECK(got == doctest::Approx(want).epsilon(1e-7));
        CHECK(got >= 0.0);
    }
}

TEST_CASE("F vanishes exactly on its own profile") {
    for (const auto& X : {make_complete_graph(4), make_discrete_circle(4), make_complete_graph(3),
                          make_two_point(1.0)}) {
        auto self = profile_from_space(X);
        CHECK(eval_F(X, self, make_exponential_weight(1.0)) == 0.0);
        auto g = grad_minus_F(X, self, make_exponential_weight(1.0));
        for (int i = 0; i < X.n; ++i)
            for (int j = 0; j < X.n; ++j) CHECK(g.at(i, j) == 0.0);
    }
    // And is strictly positive off it.
    CHECK(eval_F(make_complete_graph(4), profile_from_space(make_discrete_circle(4)),
                 make_exponential_weight(1.0)) > 0.0);
}

TEST_CASE("grad_minus_F: finite differences at generic points") {
    auto circle = profile_from_space(make_discrete_circle(4));
    auto sphere2 = model_profile_constant_curvature(2, 1.0);
    auto expw = make_exponential_weight(1.0);
    auto unifw = make_truncated_uniform_weight(3.0);
    // Generic: Euclidean point clouds keep jump radii clear of model kinks.
    auto X = testutil::random_euclidean_space(4, 2, 55);
    struct Case {
        const GrowthProfile* model;
        const WeightFunction* w;
    };
    for (const auto& c : {Case{&circle, &expw}, Case{&circle, &unifw}, Case{&sphere2, &expw},
                          Case{&sphere2, &unifw}}) {
        auto g = grad_minus_F(X, *c.model, *c.w);
        for (std::uint64_t s = 1; s <= 5; ++s) {
            auto v = testutil::random_direction(X.n, 300 + s);
            double fd = testutil::fd_directional(
                [&](const FiniteSpace& Y) { return eval_F(Y, *c.model, *c.w); }, X, v, 1e-6);
            // d/dt F(X + t v) = -<grad_minus_F, v>.
            CHECK(-testutil::pairing(g, v, X) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("grad_minus_F_tilde sits at zero on a matched profile") {
    auto X = make_discrete_circle(4);
    auto t = grad_minus_F_tilde(X, profile_from_space(X), make_exponential_weight(1.0));
    for (int i = 0; i < X.n; ++i)
        for (int j = 0; j < X.n; ++j) CHECK(t.at(i, j) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("flow: monotone descent, symmetry, stationarity") {
    auto circle = profile_from_space(make_discrete_circle(4));
    auto expw = make_exponential_weight(1.0);

    FlowOptions opt;
    opt.integrator = Integrator::euler;
    opt.dt = 1e-3;
    opt.steps = 400;
    opt.save_stride = 40;
    auto traj = flow(make_complete_graph(4), circle, expw, opt);
    REQUIRE(traj.steps.size() >= 2);
    for (std::size_t k = 1; k < traj.steps.size(); ++k)
        CHECK(traj.steps[k].F <= traj.steps[k - 1].F + 1e-14);
    // K4's full symmetry is preserved: all off-diagonal entries equal.
    const auto& last = traj.steps.back().gauge;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(last[static_cast<std::size_t>(i) * 4 + j] ==
                              doctest::Approx(last[1]).epsilon(1e-12));
    CHECK(traj.steps.back().t == doctest::Approx(0.4).epsilon(1e-12));

    // Starting on the model profile the flow does not move at all.
    FlowOptions still = opt;
    still.steps = 5;
    still.save_stride = 1;
    auto fixed = flow(make_discrete_circle(4), circle, expw, still);
    for (const auto& s : fixed.steps) {
        CHECK(s.F == 0.0);
        for (int a = 0; a < 16; ++a) CHECK(s.gauge[a] == make_discrete_circle(4).gauge[a]);
    }

    // RK4 runs and descends too.
    FlowOptions rk = opt;
    rk.integrator = Integrator::rk4;
    rk.steps = 100;
    rk.save_stride = 100;
    auto t2 = flow(make_complete_graph(4), circle, expw, rk);
    CHECK(t2.steps.back().F < t2.steps.front().F);
}

TEST_CASE("flow: clamping, preconditions, curvature term") {
    auto expw = make_exponential_weight(1.0);
    // A delta-profile target pulls every edge toward zero; a large Euler step
    // overshoots and must be clamped with the event logged.
    auto deltaProfile = profile_from_space(make_delta());
    FlowOptions opt;
    opt.integrator = Integrator::euler;
    opt.dt = 2.0;
    opt.steps = 2;
    auto traj = flow(make_complete_graph(4, 0.05), deltaProfile, expw, opt);
    long long clamps = 0;
    for (const auto& s : traj.steps) clamps += s.clamp_events;
    CHECK(clamps > 0);
    for (double g : traj.steps.back().gauge) CHECK(g >= 0.0);

    // Non-uniform weights are rejected.
    FlowOptions tiny;
    tiny.steps = 1;
    CHECK_THROWS_AS(flow(make_two_point(1.0, 0.3), deltaProfile, expw, tiny), InputError);

    // Combined F + G_K drive stays finite on a short run.
    FlowOptions withg;
    withg.steps = 3;
    withg.dt = 1e-3;
    withg.with_G = true;
    withg.K = 0.0;
    auto t3 = flow(make_star(3), profile_from_space(make_discrete_circle(4)), expw, withg);
    REQUIRE(t3.steps.size() >= 2);
    CHECK(std::isfinite(t3.steps.back().F));
    REQUIRE(t3.steps.back().G.has_value());
    CHECK(std::isfinite(*t3.steps.back().G));
}

TEST_CASE("contraction bound on certified flowed pairs") {
    auto circle = profile_from_space(make_discrete_circle(4));
    auto expw = make_exponential_weight(1.0);
    auto r = contraction_check(make_complete_graph(4, 1.0), make_complete_graph(4, 1.3), circle,
                               expw, 0.05, 0.01);
    CHECK(r.kappa == doctest::Approx(-std::exp(-1.0)).epsilon(1e-12));
    CHECK(r.bound_factor == doctest::Approx(std::exp(std::exp(-1.0) * 0.05)).epsilon(1e-12));
    CHECK(r.certified0);
    CHECK(r.certifiedT);
    CHECK(r.verdict == Verdict::PASS);
    CHECK(r.ratio <= r.bound_factor * (1.0 + 1e-3));

    // Identical starts stay identical: ratio 0 by convention.
    auto z = contraction_check(make_complete_graph(4), make_complete_graph(4), circle, expw,
                               0.05, 0.01);
    CHECK(z.verdict == Verdict::PASS);
    CHECK(z.ratio == 0.0);
}
