#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "vplap/norms.hpp"
#include "vplap/random_fields.hpp"

using namespace vplap;

namespace {

// Exponent p = 2 on [0, 1/2), p = 3 on [1/2, 1).
ExponentField half_23(const GridPtr& g) {
    return ExponentField::from_function(g, [](double x) { return x < 0.5 ? 2.0 : 3.0; });
}

// Independent scalar bisection on the modular, written against the plain
// quadrature sum rather than the norm engine.
double oracle_norm(const ScalarField& f, const ExponentField& p) {
    auto rho = [&](double mu) {
        double s = 0.0;
        const double vol = f.grid()->cell_volume();
        for (int c = 0; c < f.size(); ++c)
            s += std::pow(std::abs(f[c]) / mu, p[c]) * vol;
        return s;
    };
    double lo = 1e-8, hi = 1e8;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (rho(mid) > 1.0 ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

}  // namespace

TEST_CASE("exponent field admissibility and extremes") {
    GridPtr g = build_grid_1d(0.0, 1.0, 8);
    CHECK_THROWS_AS(ExponentField::constant(g, 0.5), config_error);
    CHECK_THROWS_AS(ExponentField::constant(g, std::nan("")), config_error);

    ExponentField p = half_23(g);
    CHECK(p.p_minus() == 2.0);
    CHECK(p.p_plus() == 3.0);
    CHECK(p.solver_admissible());

    std::vector<double> vals(8, 2.0);
    vals[3] = detail::kInf;
    ExponentField pinf(g, vals);
    CHECK(pinf.has_infinite_cells());
    CHECK_FALSE(pinf.solver_admissible());
    CHECK(pinf.p_plus() == 2.0);  // extremes over the finite part only

    CHECK_FALSE(ExponentField::constant(g, 1.0).solver_admissible());
}

TEST_CASE("conjugate exponent: algebra and endpoint conventions") {
    GridPtr g = build_grid_1d(0.0, 1.0, 4);
    CHECK(conjugate(ExponentField::constant(g, 2.0))[0] == Catch::Approx(2.0));
    CHECK(conjugate(ExponentField::constant(g, 3.0))[0] == Catch::Approx(1.5));
    CHECK(conjugate(ExponentField::constant(g, 1.0)).is_infinite(0));
    std::vector<double> vals(4, detail::kInf);
    CHECK(conjugate(ExponentField(g, vals))[0] == Catch::Approx(1.0));
}

TEST_CASE("branch exponent selection at and around norm 1") {
    GridPtr g = build_grid_1d(0.0, 1.0, 8);
    ExponentField p = half_23(g);
    CHECK(p_star_of(p, 0.5) == 3.0);
    CHECK(p_star_of(p, 1.0) == 2.0);
    CHECK(r_star_of(p, 2.0) == 3.0);
    CHECK(r_star_of(p, 1.0) == 3.0);  // exactly 1 takes the >= 1 branch
    CHECK(r_star_of(p, 0.5) == 2.0);
    const auto [l, b] = lower_upper_exponents(p, 0.5);
    CHECK(l == 3.0);
    CHECK(b == 2.0);
}

TEST_CASE("modular: spec examples and the overflow sentinel") {
    GridPtr g = build_grid_1d(0.0, 1.0, 64);
    CHECK(modular(ScalarField(g, 1.0), half_23(g)) == Catch::Approx(1.0));
    CHECK(modular(ScalarField(g, 2.0), half_23(g)) == Catch::Approx(6.0));
    CHECK(modular(ScalarField(g, 0.0), half_23(g)) == 0.0);
    CHECK(std::isinf(modular(ScalarField(g, 1e200), ExponentField::constant(g, 6.0))));
    GridPtr g2 = build_grid_1d(0.0, 1.0, 63);
    CHECK_THROWS_AS(modular(ScalarField(g2, 1.0), half_23(g)), shape_error);
}

TEST_CASE("modular with infinity cells is the discrete ess-sup there") {
    GridPtr g = build_grid_1d(0.0, 1.0, 4);
    std::vector<double> vals{2.0, detail::kInf, 2.0, detail::kInf};
    ExponentField p(g, vals);
    ScalarField f(g, {1.0, 5.0, 2.0, 3.0});
    // finite part (1 + 4) * 0.25 plus max over inf cells = 5
    CHECK(modular(f, p) == Catch::Approx(1.25 + 5.0));
    // luxemburg norm handles the mixed case too: rho(f/mu) = 1
    const double mu = luxemburg_norm(f, p);
    ScalarField fn = f;
    fn *= 1.0 / mu;
    CHECK(modular(fn, p) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("luxemburg norm: closed forms") {
    GridPtr g = build_grid_1d(0.0, 1.0, 64);
    CHECK(luxemburg_norm(ScalarField(g, 0.0), half_23(g)) == 0.0);
    CHECK(luxemburg_norm(ScalarField(g, 2.0), half_23(g)) == Catch::Approx(2.0).epsilon(1e-10));
    CHECK(luxemburg_norm(ScalarField(g, -3.5), half_23(g)) == Catch::Approx(3.5).epsilon(1e-10));
    CHECK(luxemburg_norm(ScalarField(g, 2.0), ExponentField::constant(g, 2.0)) ==
          Catch::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("luxemburg norm: constant-exponent agreement for p0 in {1.5,2,3,7}") {
    std::mt19937_64 rng(17);
    for (GridPtr g : {build_grid_1d(0.0, 1.0, 32),
                      build_grid_2d(0.0, 1.0, 6, 0.0, 1.0, 5)}) {
        for (double p0 : {1.5, 2.0, 3.0, 7.0}) {
            ExponentField p = ExponentField::constant(g, p0);
            for (int k = 0; k < 25; ++k) {
                ScalarField f = rnd::scalar_field(g, rng, -3.0, 3.0);
                const double classical = std::pow(
                    integrate_cellwise(g, [&](int c) { return std::pow(std::abs(f[c]), p0); }),
                    1.0 / p0);
                CHECK(luxemburg_norm(f, p) == Catch::Approx(classical).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("luxemburg norm: variable exponent against the independent bisection oracle") {
    GridPtr g = build_grid_1d(0.0, 1.0, 128);
    ExponentField p = ExponentField::from_function(g, [](double x) { return 2.0 + x; });
    ScalarField f = ScalarField::from_function(g, [](double x) { return x; });
    CHECK(luxemburg_norm(f, p) == Catch::Approx(oracle_norm(f, p)).epsilon(1e-10));

    std::mt19937_64 rng(23);
    for (int k = 0; k < 10; ++k) {
        ScalarField rf = rnd::scalar_field(g, rng, -4.0, 4.0);
        CHECK(luxemburg_norm(rf, p) == Catch::Approx(oracle_norm(rf, p)).epsilon(1e-10));
    }
}

TEST_CASE("luxemburg norm axioms on random variable-exponent fields") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> cd(-4.0, 4.0);
    for (GridPtr g : {build_grid_1d(0.0, 1.0, 16),
                      build_grid_2d(0.0, 1.0, 4, 0.0, 1.0, 4)}) {
        for (int k = 0; k < 50; ++k) {
            ExponentField p = rnd::exponent_field(g, rng);
            ScalarField f = rnd::scalar_field(g, rng, -2.0, 2.0);
            ScalarField h = rnd::scalar_field(g, rng, -2.0, 2.0);
            const double nf = luxemburg_norm(f, p);
            const double nh = luxemburg_norm(h, p);
            double c = cd(rng);
            if (std::abs(c) < 0.1) c = 0.5;
            ScalarField cf = f;
            cf *= c;
            CHECK(std::abs(luxemburg_norm(cf, p) - std::abs(c) * nf) <=
                  1e-10 * std::max(1.0, std::abs(c) * nf));
            CHECK(luxemburg_norm(f + h, p) <= nf + nh + 1e-10);
            if (nf > 0.0) {
                ScalarField fn = f;
                fn *= 1.0 / nf;
                CHECK(std::abs(modular(fn, p) - 1.0) <= 1e-10);
            }
        }
    }
}

TEST_CASE("modular map is strictly decreasing in mu") {
    GridPtr g = build_grid_1d(0.0, 1.0, 16);
    std::mt19937_64 rng(31);
    ScalarField f = rnd::scalar_field(g, rng, -2.0, 2.0);
    ExponentField p = rnd::exponent_field(g, rng);
    double prev = detail::kInf;
    for (double mu : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        ScalarField s = f;
        s *= 1.0 / mu;
        const double r = modular(s, p);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("weighted norm: unit weight, constants, polynomial oracle") {
    GridPtr g = build_grid_1d(0.0, 1.0, 2000);
    ExponentField p2 = ExponentField::constant(g, 2.0);
    ScalarField f = ScalarField::from_function(g, [](double x) { return x; });
    ScalarField one(g, 1.0);
    CHECK(weighted_norm(f, one, p2) == Catch::Approx(luxemburg_norm(f, p2)));
    ScalarField two(g, 2.0);
    CHECK(weighted_norm(one, two, p2) == Catch::Approx(2.0).epsilon(1e-10));
    ScalarField v = ScalarField::from_function(g, [](double x) { return 1.0 - x; });
    // midpoint quadrature of x^2 (1-x)^2 is O(h^2) accurate
    CHECK(weighted_norm(f, v, p2) ==
          Catch::Approx(std::sqrt(1.0 / 30.0)).epsilon(1e-5));
    ScalarField neg(g, -1.0);
    CHECK_THROWS_AS(weighted_norm(f, neg, p2), domain_error);
}

TEST_CASE("holder check: unit and zero fields, K override") {
    GridPtr g = build_grid_1d(0.0, 1.0, 16);
    ExponentField p2 = ExponentField::constant(g, 2.0);
    ScalarField one(g, 1.0);
    auto rep = holder_check(one, one, p2);
    CHECK(rep.lhs == Catch::Approx(1.0));
    CHECK(rep.rhs == Catch::Approx(4.0));
    CHECK(rep.ok);
    auto zero_rep = holder_check(ScalarField(g, 0.0), one, p2);
    CHECK(zero_rep.lhs == 0.0);
    CHECK(zero_rep.ok);
    // the debug override makes the check falsifiable
    auto bad = holder_check(one, one, p2, 0.5);
    CHECK_FALSE(bad.ok);
}

TEST_CASE("mod-norm sandwich: spec example and scaled random fields") {
    GridPtr g = build_grid_1d(0.0, 1.0, 64);
    ExponentField p = half_23(g);
    auto rep = mod_norm_bounds_check(ScalarField(g, 2.0), p);
    CHECK(rep.norm == Catch::Approx(2.0).epsilon(1e-10));
    CHECK(rep.rho == Catch::Approx(6.0).epsilon(1e-10));
    CHECK(rep.lower == Catch::Approx(4.0).epsilon(1e-10));
    CHECK(rep.upper == Catch::Approx(8.0).epsilon(1e-10));
    CHECK(rep.ok);

    std::mt19937_64 rng(37);
    for (double target : {0.3, 1.0, 2.5}) {
        ScalarField f = rnd::scalar_field(g, rng, -1.0, 1.0);
        const double n = luxemburg_norm(f, p);
        f *= target / n;
        auto r = mod_norm_bounds_check(f, p);
        CHECK(r.ok);
        if (target == 1.0) CHECK(r.rho == Catch::Approx(1.0).margin(1e-9));
    }

    std::vector<double> vals(64, detail::kInf);
    CHECK_THROWS_AS(mod_norm_bounds_check(ScalarField(g, 1.0), ExponentField(g, vals)),
                    domain_error);
}

TEST_CASE("power-norm sandwich: classical identity and spec example") {
    GridPtr g = build_grid_1d(0.0, 1.0, 64);
    std::mt19937_64 rng(41);
    ExponentField p2 = ExponentField::constant(g, 2.0);
    for (int k = 0; k < 10; ++k) {
        ScalarField f = rnd::scalar_field(g, rng, -2.0, 2.0);
        auto rep = power_norm_check(f, p2);
        CHECK(rep.mid == Catch::Approx(luxemburg_norm(f, p2)).epsilon(1e-9));
        CHECK(rep.ok);
    }
    auto rep = power_norm_check(ScalarField(g, 2.0), half_23(g));
    CHECK(rep.l_star == 2.0);
    CHECK(rep.b_star == 3.0);
    CHECK(rep.lower == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(rep.upper == Catch::Approx(4.0).epsilon(1e-9));
    CHECK(rep.mid > 2.9);
    CHECK(rep.mid < 3.1);
    CHECK(rep.ok);

    auto unit = power_norm_check(ScalarField(g, 1.0), half_23(g));
    CHECK(unit.lower == Catch::Approx(1.0));
    CHECK(unit.mid == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(unit.upper == Catch::Approx(1.0));

    CHECK_THROWS_AS(power_norm_check(ScalarField(g, 1.0), ExponentField::constant(g, 1.0)),
                    domain_error);
}
