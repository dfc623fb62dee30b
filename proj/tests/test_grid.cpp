#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "vplap/grid.hpp"

using namespace vplap;

TEST_CASE("grid construction validates its spec") {
    CHECK_THROWS_AS(Grid(3, {0, 0}, {1, 1}, {4, 4}), config_error);
    CHECK_THROWS_AS(Grid(0, {0, 0}, {1, 1}, {4, 4}), config_error);
    CHECK_THROWS_AS(Grid(1, {0, 0}, {0, 1}, {4, 4}), config_error);
    CHECK_THROWS_AS(Grid(1, {1, 0}, {0, 1}, {4, 4}), config_error);
    CHECK_THROWS_AS(Grid(1, {0, 0}, {1, 1}, {1, 4}), config_error);
    CHECK_NOTHROW(Grid(1, {0, 0}, {1, 1}, {2, 1}));
}

TEST_CASE("grid geometry: cells, volume, measure, centers") {
    GridPtr g1 = build_grid_1d(0.0, 1.0, 10);
    CHECK(g1->cells() == 10);
    CHECK(g1->cell_volume() == Catch::Approx(0.1));
    CHECK(g1->measure() == Catch::Approx(1.0));
    CHECK(g1->cell_center(0)[0] == Catch::Approx(0.05));
    CHECK(g1->cell_center(9)[0] == Catch::Approx(0.95));

    GridPtr g2 = build_grid_2d(0.0, 2.0, 4, -1.0, 1.0, 5);
    CHECK(g2->cells() == 20);
    CHECK(g2->cell_volume() == Catch::Approx(0.5 * 0.4));
    CHECK(g2->measure() == Catch::Approx(4.0));
}

TEST_CASE("traversal order is lexicographic with axis 0 fastest") {
    GridPtr g = build_grid_2d(0.0, 1.0, 3, 0.0, 1.0, 2);
    int c = 0;
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 3; ++i, ++c) {
            CHECK(g->flat_index(i, j) == c);
            const auto mi = g->multi_index(c);
            CHECK(mi[0] == i);
            CHECK(mi[1] == j);
        }
}

TEST_CASE("integrate: midpoint rule is exact for affine fields") {
    GridPtr g = build_grid_1d(0.0, 1.0, 100);
    ScalarField f = ScalarField::from_function(g, [](double x) { return x; });
    CHECK(integrate(f) == Catch::Approx(0.5).margin(1e-14));

    GridPtr g2 = build_grid_2d(0.0, 1.0, 8, 0.0, 1.0, 8);
    ScalarField f2 =
        ScalarField::from_function(g2, [](double x, double y) { return 2.0 * x - y; });
    CHECK(integrate(f2) == Catch::Approx(0.5).margin(1e-14));
}

TEST_CASE("fields reject grid mismatches") {
    GridPtr a = build_grid_1d(0.0, 1.0, 4);
    GridPtr b = build_grid_1d(0.0, 1.0, 4);
    ScalarField fa(a, 1.0), fb(b, 1.0);
    CHECK_THROWS_AS(fa += fb, shape_error);
    CHECK_THROWS_AS(ScalarField(a, std::vector<double>(3, 0.0)), shape_error);
}

TEST_CASE("gradient of affine fields is exact including boundary cells") {
    GridPtr g = build_grid_1d(0.0, 1.0, 17);
    ScalarField u = ScalarField::from_function(g, [](double x) { return 3.0 * x - 1.0; });
    VectorField du = gradient(u);
    for (int c = 0; c < g->cells(); ++c)
        CHECK(du.component(c, 0) == Catch::Approx(3.0).margin(1e-12));

    GridPtr g2 = build_grid_2d(0.0, 1.0, 6, 0.0, 2.0, 7);
    ScalarField u2 =
        ScalarField::from_function(g2, [](double x, double y) { return x - 2.0 * y; });
    VectorField du2 = gradient(u2);
    for (int c = 0; c < g2->cells(); ++c) {
        CHECK(du2.component(c, 0) == Catch::Approx(1.0).margin(1e-12));
        CHECK(du2.component(c, 1) == Catch::Approx(-2.0).margin(1e-12));
    }
}

TEST_CASE("gradient of constants vanishes; two-cell axis uses plain difference") {
    GridPtr g = build_grid_1d(0.0, 1.0, 2);
    ScalarField u(g, {1.0, 3.0});
    VectorField du = gradient(u);
    CHECK(du.component(0, 0) == Catch::Approx(4.0));  // (3-1)/0.5
    CHECK(du.component(1, 0) == Catch::Approx(4.0));

    ScalarField c(g, 7.0);
    CHECK(gradient(c).component(0, 0) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("gradient converges at second order for smooth fields") {
    double prev_err = 0.0;
    for (int m : {16, 32}) {
        GridPtr g = build_grid_1d(0.0, 1.0, m);
        ScalarField u =
            ScalarField::from_function(g, [](double x) { return std::sin(M_PI * x); });
        VectorField du = gradient(u);
        double err = 0.0;
        for (int c = 0; c < m; ++c) {
            const double x = g->cell_center(c)[0];
            err = std::max(err, std::abs(du.component(c, 0) - M_PI * std::cos(M_PI * x)));
        }
        if (prev_err > 0.0) CHECK(prev_err / err > 3.0);  // ~4x for O(h^2)
        prev_err = err;
    }
}

TEST_CASE("gradient_adjoint is the exact transpose of gradient") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (GridPtr g : {build_grid_1d(0.0, 1.0, 9),
                      build_grid_2d(0.0, 1.0, 5, 0.0, 1.0, 4)}) {
        ScalarField u(g);
        VectorField w(g);
        for (int c = 0; c < g->cells(); ++c) u[c] = d(rng);
        for (double& v : w.values()) v = d(rng);
        const VectorField gu = gradient(u);
        const ScalarField gtw = gradient_adjoint(w);
        double lhs = 0.0, rhs = 0.0;
        for (int c = 0; c < g->cells(); ++c) {
            for (int a = 0; a < g->dim(); ++a)
                lhs += gu.component(c, a) * w.component(c, a);
            rhs += u[c] * gtw[c];
        }
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("weighted_average: constants, affine case, and error modes") {
    GridPtr g = build_grid_1d(0.0, 1.0, 50);
    ScalarField f = ScalarField::from_function(g, [](double x) { return x; });
    ScalarField one(g, 1.0);
    CHECK(weighted_average(f, one) == Catch::Approx(0.5).margin(1e-14));
    ScalarField c(g, 4.0);
    CHECK(weighted_average(c, f) == Catch::Approx(4.0));

    ScalarField neg(g, -1.0);
    CHECK_THROWS_AS(weighted_average(f, neg), domain_error);
    ScalarField zero(g, 0.0);
    CHECK_THROWS_AS(weighted_average(f, zero), domain_error);
}

TEST_CASE("csv dumps carry the documented header and full precision") {
    GridPtr g = build_grid_1d(0.0, 1.0, 2);
    ScalarField f(g, {1.0 / 3.0, 2.0});
    std::ostringstream os;
    dump_csv(os, f);
    const std::string s = os.str();
    CHECK(s.rfind("cell_index, x_1, value\n", 0) == 0);
    CHECK(s.find("0.33333333333333331") != std::string::npos);

    GridPtr g2 = build_grid_2d(0.0, 1.0, 2, 0.0, 1.0, 2);
    VectorField w(g2, 0.5);
    std::ostringstream os2;
    dump_csv(os2, w);
    CHECK(os2.str().rfind("cell_index, x_1, x_2, value, value_2\n", 0) == 0);
}
