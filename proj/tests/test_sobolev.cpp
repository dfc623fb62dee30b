#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "vplap/random_fields.hpp"
#include "vplap/sobolev.hpp"

using namespace vplap;

TEST_CASE("sobolev pairs share a grid") {
    GridPtr a = build_grid_1d(0.0, 1.0, 4);
    GridPtr b = build_grid_1d(0.0, 1.0, 4);
    CHECK_THROWS_AS(SobolevPair(ScalarField(a, 1.0), VectorField(b)), shape_error);
}

TEST_CASE("sobolev_norm: zero, constant, and the affine closed form") {
    GridPtr g = build_grid_1d(0.0, 1.0, 400);
    ExponentField p2 = ExponentField::constant(g, 2.0);
    ScalarField one(g, 1.0);
    MatrixField I = MatrixField::identity(g);

    CHECK(sobolev_norm(SobolevPair(ScalarField(g, 0.0), VectorField(g)), one, I, p2) == 0.0);
    CHECK(sobolev_norm(SobolevPair(one, VectorField(g)), one, I, p2) ==
          Catch::Approx(1.0).epsilon(1e-10));

    ScalarField u = ScalarField::from_function(g, [](double x) { return x; });
    // ||x||_2 + ||1||_2 = (1/3)^{1/2} + 1, up to midpoint quadrature error
    CHECK(sobolev_norm(lift(u), one, I, p2) ==
          Catch::Approx(std::sqrt(1.0 / 3.0) + 1.0).epsilon(1e-5));
}

TEST_CASE("lift: constants, affine fields, smooth derivative") {
    GridPtr g = build_grid_1d(0.0, 1.0, 64);
    SobolevPair c = lift(ScalarField(g, 5.0));
    CHECK(c.g.values()[10] == Catch::Approx(0.0).margin(1e-13));

    SobolevPair a = lift(ScalarField::from_function(g, [](double x) { return 2.0 * x; }));
    CHECK(a.g.component(0, 0) == Catch::Approx(2.0).margin(1e-12));
    CHECK(a.g.component(63, 0) == Catch::Approx(2.0).margin(1e-12));

    SobolevPair s =
        lift(ScalarField::from_function(g, [](double x) { return std::sin(M_PI * x); }));
    for (int cc = 0; cc < 64; ++cc) {
        const double x = g->cell_center(cc)[0];
        CHECK(s.g.component(cc, 0) ==
              Catch::Approx(M_PI * std::cos(M_PI * x)).margin(5e-3));
    }
}

TEST_CASE("mean_zero_project: constants vanish, idempotence, affine shift") {
    GridPtr g = build_grid_1d(0.0, 1.0, 50);
    ScalarField one(g, 1.0);
    ExponentField p2 = ExponentField::constant(g, 2.0);

    SobolevPair c = mean_zero_project(lift(ScalarField(g, 5.0)), one);
    CHECK(c.u.max_abs() <= 1e-14);
    CHECK(is_mean_zero(c, one, p2));

    SobolevPair x = mean_zero_project(lift(ScalarField::from_function(
                                          g, [](double t) { return t; })),
                                      one);
    CHECK(x.u[0] == Catch::Approx(g->cell_center(0)[0] - 0.5).margin(1e-13));
    CHECK(is_mean_zero(x, one, p2));

    SobolevPair xx = mean_zero_project(x, one);
    for (int cc = 0; cc < 50; ++cc)
        CHECK(std::abs(xx.u[cc] - x.u[cc]) <= 1e-12);
}

TEST_CASE("sobolev_norm is a norm: homogeneity and triangle on random pairs") {
    std::mt19937_64 rng(43);
    GridPtr g = build_grid_2d(0.0, 1.0, 4, 0.0, 1.0, 4);
    std::uniform_real_distribution<double> cd(0.2, 3.0);
    for (int k = 0; k < 40; ++k) {
        ExponentField p = rnd::exponent_field(g, rng);
        ScalarField v = rnd::weight_field(g, rng);
        MatrixField Q = rnd::matrix_field(g, rng, 0.0, 3.0);
        SobolevPair a = rnd::pair(g, rng);
        SobolevPair b = rnd::pair(g, rng);
        const double na = sobolev_norm(a, v, Q, p);
        const double nb = sobolev_norm(b, v, Q, p);
        const double c = cd(rng);
        SobolevPair ca(c * ScalarField(a.u), c * VectorField(a.g));
        CHECK(std::abs(sobolev_norm(ca, v, Q, p) - c * na) <= 1e-10 * std::max(1.0, c * na));
        SobolevPair sum(a.u + b.u, a.g + b.g);
        CHECK(sobolev_norm(sum, v, Q, p) <= na + nb + 1e-10);
    }
}
