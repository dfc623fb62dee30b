#pragma once

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "vplap/neumann.hpp"

namespace vplap {
namespace rnd {

// All generators draw from a caller-owned mt19937_64 so every randomized
// battery is reproducible from a single seed.

inline ScalarField scalar_field(const GridPtr& grid, std::mt19937_64& rng,
                                double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    ScalarField f(grid);
    for (int c = 0; c < f.size(); ++c) f[c] = d(rng);
    return f;
}

inline VectorField vector_field(const GridPtr& grid, std::mt19937_64& rng,
                                double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    VectorField g(grid);
    for (double& v : g.values()) v = d(rng);
    return g;
}

// Cellwise exponent uniform in [p_lo, p_hi] (default matches the battery
// range 1.1 .. 6).
inline ExponentField exponent_field(const GridPtr& grid, std::mt19937_64& rng,
                                    double p_lo = 1.1, double p_hi = 6.0) {
    std::uniform_real_distribution<double> d(p_lo, p_hi);
    std::vector<double> p(grid->cells());
    for (double& v : p) v = d(rng);
    return ExponentField(grid, std::move(p));
}

// Piecewise-constant exponent: a handful of random blocks along axis 0.
inline ExponentField piecewise_exponent_field(const GridPtr& grid,
                                              std::mt19937_64& rng,
                                              double p_lo = 1.1, double p_hi = 6.0) {
    std::uniform_int_distribution<int> nb(2, 4);
    std::uniform_real_distribution<double> d(p_lo, p_hi);
    const int blocks = nb(rng);
    std::vector<double> vals(blocks);
    for (double& v : vals) v = d(rng);
    std::vector<double> p(grid->cells());
    const int m = grid->resolution(0);
    for (int c = 0; c < grid->cells(); ++c) {
        const int i = grid->multi_index(c)[0];
        p[c] = vals[std::min(blocks - 1, i * blocks / m)];
    }
    return ExponentField(grid, std::move(p));
}

inline ScalarField weight_field(const GridPtr& grid, std::mt19937_64& rng,
                                double lo = 0.2, double hi = 5.0) {
    return scalar_field(grid, rng, lo, hi);
}

// Random symmetric PSD matrix field built from a rotation and non-negative
// eigenvalues in [lam_lo, lam_hi]; 1D degenerates to a scalar.
inline MatrixField matrix_field(const GridPtr& grid, std::mt19937_64& rng,
                                double lam_lo = 0.0, double lam_hi = 3.0) {
    std::uniform_real_distribution<double> lam(lam_lo, lam_hi);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    MatrixField Q(grid);
    if (grid->dim() == 1) {
        for (int c = 0; c < Q.cells(); ++c) Q.at(c, 0, 0) = lam(rng);
        return Q;
    }
    for (int c = 0; c < Q.cells(); ++c) {
        const double l1 = lam(rng), l2 = lam(rng);
        const double t = ang(rng), ct = std::cos(t), st = std::sin(t);
        Q.at(c, 0, 0) = l1 * ct * ct + l2 * st * st;
        Q.at(c, 1, 1) = l1 * st * st + l2 * ct * ct;
        Q.at(c, 0, 1) = Q.at(c, 1, 0) = (l1 - l2) * ct * st;
    }
    return Q;
}

// Degenerate matrix weight with a zero eigenvalue on half the domain
// (axis-0 right half); the surviving eigenvalue is random in (0, lam_hi].
inline MatrixField half_degenerate_matrix_field(const GridPtr& grid,
                                                std::mt19937_64& rng,
                                                double lam_hi = 3.0) {
    std::uniform_real_distribution<double> lam(0.1, lam_hi);
    MatrixField Q(grid);
    const double mid = 0.5 * (grid->lower(0) + grid->upper(0));
    for (int c = 0; c < Q.cells(); ++c) {
        const bool dead = grid->cell_center(c)[0] > mid;
        Q.at(c, 0, 0) = dead ? 0.0 : lam(rng);
        if (grid->dim() == 2) Q.at(c, 1, 1) = lam(rng);
    }
    return Q;
}

// Free pair (u, g): g is not the gradient of u, exercising the pair space
// rather than the lifted subspace.
inline SobolevPair pair(const GridPtr& grid, std::mt19937_64& rng,
                        double scale = 1.0) {
    ScalarField u = scalar_field(grid, rng, -scale, scale);
    VectorField g = vector_field(grid, rng, -scale, scale);
    return SobolevPair(std::move(u), std::move(g));
}

// Mean-zero lifted pair rescaled so its Sobolev norm exceeds `threshold`.
inline SobolevPair large_mean_zero_pair(const ProblemData& data,
                                        std::mt19937_64& rng, double threshold) {
    ScalarField u = scalar_field(data.grid, rng);
    const double avg = weighted_average(u, data.v);
    for (int c = 0; c < u.size(); ++c) u[c] -= avg;
    SobolevPair w = lift(u);
    const double nrm = sobolev_norm(w, data.v, data.Q, data.p);
    const double s = nrm > 0.0 ? 1.5 * threshold / nrm : 1.0;
    w.u *= s;
    w.g *= s;
    return w;
}

}  // namespace rnd
}  // namespace vplap
