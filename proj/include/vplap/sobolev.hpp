#pragma once

#include <cmath>
#include <utility>

#include "vplap/matrix_weight.hpp"
#include "vplap/norms.hpp"

namespace vplap {

// Discrete element of the degenerate Sobolev space: a scalar function and
// its weak-gradient surrogate.  g is kept explicit; solver outputs couple
// it to u through the discretization, but it is not recomputed from u.
struct SobolevPair {
    ScalarField u;
    VectorField g;

    SobolevPair(ScalarField u_, VectorField g_) : u(std::move(u_)), g(std::move(g_)) {
        detail::require_same_grid(u.grid(), g.grid());
    }
};

inline SobolevPair lift(const ScalarField& u) { return SobolevPair(u, gradient(u)); }

inline double sobolev_norm(const SobolevPair& w, const ScalarField& v,
                           const MatrixField& Q, const ExponentField& p) {
    return weighted_norm(w.u, v, p) + lq_norm(w.g, Q, p);
}

// Shift u by its v-weighted average; g is unchanged since constants have
// zero gradient.
inline SobolevPair mean_zero_project(const SobolevPair& w, const ScalarField& v) {
    const double avg = weighted_average(w.u, v);
    ScalarField u = w.u;
    for (int c = 0; c < u.size(); ++c) u[c] -= avg;
    return SobolevPair(std::move(u), w.g);
}

inline bool is_mean_zero(const SobolevPair& w, const ScalarField& v,
                         const ExponentField& p) {
    const double m = integrate_cellwise(w.u.grid(), [&](int c) { return w.u[c] * v[c]; });
    if (w.u.max_abs() == 0.0) return std::abs(m) <= 1e-14;
    return std::abs(m) <= 1e-10 * weighted_norm(w.u, v, p) * w.u.grid()->measure();
}

}  // namespace vplap
