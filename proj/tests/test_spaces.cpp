#include <doctest.h>

#include <cmath>

#include "mmflow/space.hpp"
#include "test_util.hpp"

using namespace mmflow;

TEST_CASE("make_space validates shapes and weights") {
    CHECK_THROWS_AS(make_space(2, {0, 1, 1}, {0.5, 0.5}), InputError);
    CHECK_THROWS_AS(make_space(2, {0, 1, 2, 0}, {0.5, 0.5}), InputError);          // asymmetric
    CHECK_THROWS_AS(make_space(2, {0, 1, 1, 0}, {-0.1, 1.1}), InputError);         // sign
    CHECK_THROWS_AS(make_space(2, {0, 1, 1, 0}, {0.2, 0.2}), InputError);          // sum
    CHECK_THROWS_AS(make_space(0, {}, {}), InputError);

    // Near-symmetric input is forced exactly symmetric; the diagonal is
    // forced to zero.
    auto X = make_space(2, {0.5, 1.0, 1.0 + 1e-13, 0}, {0.5, 0.5});
    CHECK(X.g(0, 1) == X.g(1, 0));
    CHECK(X.g(0, 0) == 0.0);
}

TEST_CASE("validate classifies gauge matrices") {
    CHECK(validate(make_complete_graph(3)) == SpaceClassKind::metric);
    // Zero distance between distinct points: pseudo-metric, not metric.
    auto P = make_space(2, {0, 0, 0, 0}, {0.5, 0.5});
    CHECK(validate(P) == SpaceClassKind::pseudo_metric);
    // Triangle violation: gauged only.
    auto G = make_space(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(validate(G) == SpaceClassKind::gauged);
    // Negative entries are allowed for gauges.
    auto N = make_space(2, {0, -1, -1, 0}, {0.5, 0.5});
    CHECK(validate(N) == SpaceClassKind::gauged);
}

TEST_CASE("size_p closed forms") {
    CHECK(size_p(make_delta(), 2.0) == 0.0);
    // Two points at distance 1, weights 1/2: size_2^2 = 2*(1/4) = 1/2.
    CHECK(size_p(make_two_point(1.0), 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    // Complete graph K_n, edge 1: size_2 = sqrt((n-1)/n).
    for (int n = 2; n <= 6; ++n)
        CHECK(size_p(make_complete_graph(n), 2.0) ==
              doctest::Approx(std::sqrt((n - 1.0) / n)).epsilon(1e-15));
    CHECK(size_p(make_complete_graph(4), 2.0) == doctest::Approx(std::sqrt(3.0 / 4.0)).epsilon(1e-15));
    // L^1 and sup norms.
    CHECK(size_p(make_two_point(3.0), 1.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(size_p(make_two_point(3.0), std::numeric_limits<double>::infinity()) == 3.0);
    // Zero-weight points do not count toward the support diameter.
    auto Z = make_space(3, {0, 1, 9, 1, 0, 1, 9, 1, 0}, {0.5, 0.5, 0.0});
    CHECK(size_p(Z, std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("scale and normalize_to_unit_sphere") {
    auto X = make_complete_graph(4);
    auto Y = scale(X, 2.5);
    CHECK(Y.g(0, 1) == 2.5);
    CHECK(size_p(Y, 2.0) == doctest::Approx(2.5 * size_p(X, 2.0)).epsilon(1e-15));
    auto U = normalize_to_unit_sphere(X);
    CHECK(size_p(U, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    // K4 normalized has edge sqrt(4/3).
    CHECK(U.g(0, 1) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-15));
    CHECK_THROWS_AS(normalize_to_unit_sphere(make_delta()), PreconditionError);
}

TEST_CASE("split_atoms refines to a uniform space of the same size") {
    auto X = make_space(2, {0, 1, 1, 0}, {0.25, 0.75});
    auto S = split_atoms(X, 4);
    CHECK(S.n == 4);
    for (int i = 0; i < 4; ++i) CHECK(S.w(i) == doctest::Approx(0.25).epsilon(1e-15));
    // Copies of the same atom sit at gauge 0; cross-block keeps the edge.
    CHECK(S.g(1, 2) == 0.0);
    CHECK(S.g(0, 1) == 1.0);
    CHECK(size_p(S, 2.0) == doctest::Approx(size_p(X, 2.0)).epsilon(1e-14));
    // Weight not representable as k/N.
    CHECK_THROWS_AS(split_atoms(make_two_point(1.0, 1.0 / 3.0), 4), InputError);
    // Rational weights split exactly.
    auto T = split_atoms(make_two_point(1.0, 1.0 / 3.0), 3);
    CHECK(T.n == 3);
}

TEST_CASE("triangle_defect worked example and metric cases") {
    CHECK(triangle_defect(make_complete_graph(5)) == 0.0);
    CHECK(triangle_defect(make_path_graph(4)) == 0.0);
    CHECK(triangle_defect(make_star(3)) == 0.0);
    // d01 = d12 = 1, d02 = 5, uniform thirds: ordered triples (0,1,2) and
    // (2,1,0) each violate by 3, mass 1/27 each.
    auto X = make_space(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(triangle_defect(X) == doctest::Approx(6.0 / 27.0).epsilon(1e-15));
}

TEST_CASE("canonical constructors") {
    auto C = make_discrete_circle(4);
    CHECK(C.n == 4);
    CHECK(C.g(0, 1) == 1.0);
    CHECK(C.g(0, 2) == 2.0);
    CHECK(C.g(0, 3) == 1.0);
    auto P = make_path_graph(3, 2.0);
    CHECK(P.g(0, 2) == 4.0);
    auto S = make_star(3, 1.0);
    CHECK(S.n == 4);
    CHECK(S.g(0, 1) == 1.0);
    CHECK(S.g(1, 2) == 2.0);
}
