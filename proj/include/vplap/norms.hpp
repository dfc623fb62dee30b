#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "vplap/exponent.hpp"
#include "vplap/grid.hpp"

namespace vplap {

// Modular rho(f) = sum over finite cells |f|^p(x) * vol, plus the discrete
// ess-sup (max |f|) over infinity-marked cells.  Saturates to +inf when a
// term leaves the representable range.
inline double modular(const ScalarField& f, const ExponentField& p) {
    detail::require_same_grid(f.grid(), p.grid());
    detail::KahanSum sum;
    const double vol = f.grid()->cell_volume();
    double sup = 0.0;
    for (int c = 0; c < f.size(); ++c) {
        const double a = std::abs(f[c]);
        if (p.is_infinite(c)) {
            sup = std::max(sup, a);
            continue;
        }
        const double term = std::pow(a, p[c]) * vol;
        if (!std::isfinite(term)) return detail::kInf;
        sum.add(term);
    }
    const double r = sum.value() + sup;
    return std::isfinite(r) ? r : detail::kInf;
}

namespace detail {

inline double modular_scaled(const ScalarField& f, const ExponentField& p, double mu) {
    KahanSum sum;
    const double vol = f.grid()->cell_volume();
    double sup = 0.0;
    for (int c = 0; c < f.size(); ++c) {
        const double a = std::abs(f[c]) / mu;
        if (p.is_infinite(c)) {
            sup = std::max(sup, a);
            continue;
        }
        const double term = std::pow(a, p[c]) * vol;
        if (!std::isfinite(term)) return kInf;
        sum.add(term);
    }
    const double r = sum.value() + sup;
    return std::isfinite(r) ? r : kInf;
}

}  // namespace detail

struct LuxemburgOptions {
    double rel_tol = 1e-12;
    int max_iters = 200;
    int max_bracket_steps = 60;
};

// Luxemburg norm: the unique mu > 0 with rho(f/mu) = 1, by bracketed
// bisection; mu -> rho(f/mu) is continuous and strictly decreasing for
// nonzero f, and the overflow sentinel is treated as "> 1".
inline double luxemburg_norm(const ScalarField& f, const ExponentField& p,
                             const LuxemburgOptions& opts = {}) {
    detail::require_same_grid(f.grid(), p.grid());
    const double fmax = f.max_abs();
    if (fmax == 0.0) return 0.0;

    const double pm = std::isfinite(p.p_minus()) ? p.p_minus() : 1.0;
    double mu0 = fmax * std::pow(f.grid()->measure(), 1.0 / pm);
    if (!(mu0 > 0.0) || !std::isfinite(mu0)) mu0 = std::max(fmax, 1e-300);

    double lo = mu0, hi = mu0;
    double r = detail::modular_scaled(f, p, mu0);
    if (r > 1.0) {
        int k = 0;
        do {
            lo = hi;
            hi *= 2.0;
            if (++k > opts.max_bracket_steps)
                throw numerical_range_error("luxemburg_norm: failed to bracket root");
            r = detail::modular_scaled(f, p, hi);
        } while (r > 1.0);
    } else if (r < 1.0) {
        int k = 0;
        do {
            hi = lo;
            lo *= 0.5;
            if (++k > opts.max_bracket_steps)
                throw numerical_range_error("luxemburg_norm: failed to bracket root");
            r = detail::modular_scaled(f, p, lo);
        } while (r < 1.0);
        if (r == 1.0) return lo;
    } else {
        return mu0;
    }

    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_iters && (hi - lo) > opts.rel_tol * hi; ++it) {
        mid = 0.5 * (lo + hi);
        const double rm = detail::modular_scaled(f, p, mid);
        if (rm > 1.0)
            lo = mid;
        else if (rm < 1.0)
            hi = mid;
        else
            return mid;
    }
    return 0.5 * (lo + hi);
}

// ||f||_{L^{p(.)}(v;E)} = ||f v||_{L^{p(.)}(E)}.
inline double weighted_norm(const ScalarField& f, const ScalarField& v,
                            const ExponentField& p) {
    detail::require_same_grid(f.grid(), v.grid());
    ScalarField fv(f.grid());
    for (int c = 0; c < f.size(); ++c) {
        if (v[c] < 0.0) throw domain_error("weight must be non-negative");
        fv[c] = f[c] * v[c];
    }
    return luxemburg_norm(fv, p);
}

struct HolderReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 4.0;
    bool ok = false;
};

inline HolderReport holder_check(const ScalarField& f, const ScalarField& g,
                                 const ExponentField& p, double constant = 4.0) {
    detail::require_same_grid(f.grid(), g.grid());
    HolderReport rep;
    rep.constant = constant;
    rep.lhs = integrate_cellwise(f.grid(), [&](int c) { return std::abs(f[c] * g[c]); });
    rep.rhs = constant * luxemburg_norm(f, p) * luxemburg_norm(g, conjugate(p));
    rep.ok = rep.lhs <= rep.rhs + 1e-10;
    return rep;
}

struct ModNormReport {
    double norm = 0.0;
    double rho = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool ok = false;
};

// Sandwich between rho(f) and powers of the norm: exponents p_- / p_+
// swap roles at ||f|| = 1.
inline ModNormReport mod_norm_bounds_check(const ScalarField& f,
                                           const ExponentField& p) {
    if (p.has_infinite_cells())
        throw domain_error("mod_norm_bounds_check requires |E_inf| = 0");
    ModNormReport rep;
    rep.norm = luxemburg_norm(f, p);
    rep.rho = modular(f, p);
    if (rep.norm >= 1.0) {
        rep.lower = std::pow(rep.norm, p.p_minus());
        rep.upper = std::pow(rep.norm, p.p_plus());
    } else {
        rep.lower = std::pow(rep.norm, p.p_plus());
        rep.upper = std::pow(rep.norm, p.p_minus());
    }
    const double slack = 1e-10 * std::max({1.0, rep.lower, rep.rho, rep.upper});
    rep.ok = rep.lower <= rep.rho + slack && rep.rho <= rep.upper + slack;
    return rep;
}

struct PowerNormReport {
    double lower = 0.0;
    double mid = 0.0;
    double upper = 0.0;
    double l_star = 0.0;
    double b_star = 0.0;
    bool ok = false;
};

// ||f||^{l*-1} <= || |f|^{p(.)-1} ||_{p'(.)} <= ||f||^{b*-1}.
inline PowerNormReport power_norm_check(const ScalarField& f, const ExponentField& p) {
    if (!p.solver_admissible())
        throw domain_error("power_norm_check requires 1 < p_- <= p_+ < inf");
    PowerNormReport rep;
    const double norm = luxemburg_norm(f, p);
    const auto [l_star, b_star] = lower_upper_exponents(p, norm);
    rep.l_star = l_star;
    rep.b_star = b_star;

    ScalarField fp(f.grid());
    for (int c = 0; c < f.size(); ++c) fp[c] = std::pow(std::abs(f[c]), p[c] - 1.0);
    rep.mid = luxemburg_norm(fp, conjugate(p));
    rep.lower = std::pow(norm, l_star - 1.0);
    rep.upper = std::pow(norm, b_star - 1.0);
    const double slack = 1e-10 * std::max({1.0, rep.lower, rep.mid, rep.upper});
    rep.ok = rep.lower <= rep.mid + slack && rep.mid <= rep.upper + slack;
    return rep;
}

}  // namespace vplap
