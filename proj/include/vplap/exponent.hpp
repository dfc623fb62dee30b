#pragma once

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <utility>
#include <vector>

#include "vplap/grid.hpp"

namespace vplap {

// Pointwise exponent p(x) >= 1 per cell.  A cell may carry the infinity
// marker (stored as an actual +inf double); p_minus/p_plus range over the
// finite part only.
class ExponentField {
public:
    ExponentField(GridPtr grid, std::vector<double> p)
        : grid_(std::move(grid)), p_(std::move(p)) {
        if (static_cast<int>(p_.size()) != grid_->cells())
            throw shape_error("exponent field size does not match grid");
        finalize();
    }

    static ExponentField constant(GridPtr grid, double p0) {
        std::vector<double> p(grid->cells(), p0);
        return ExponentField(std::move(grid), std::move(p));
    }

    template <class F>
    static ExponentField from_function(GridPtr grid, F&& f) {
        std::vector<double> p(grid->cells());
        for (int c = 0; c < grid->cells(); ++c) {
            const auto x = grid->cell_center(c);
            if constexpr (std::is_invocable_v<F&, double, double>)
                p[c] = f(x[0], x[1]);
            else
                p[c] = f(x[0]);
        }
        return ExponentField(std::move(grid), std::move(p));
    }

    const GridPtr& grid() const { return grid_; }
    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int c) const { return p_[c]; }
    bool is_infinite(int c) const { return std::isinf(p_[c]); }
    bool has_infinite_cells() const { return inf_cells_ > 0; }
    int infinite_cells() const { return inf_cells_; }
    double p_minus() const { return p_minus_; }
    double p_plus() const { return p_plus_; }

    bool solver_admissible() const {
        return inf_cells_ == 0 && finite_cells_ > 0 && p_minus_ > 1.0 &&
               std::isfinite(p_plus_);
    }

    // Pointwise Hölder conjugate: p' = p/(p-1), with 1 <-> inf.
    ExponentField conjugate() const {
        std::vector<double> q(p_.size());
        for (std::size_t c = 0; c < p_.size(); ++c) {
            if (std::isinf(p_[c]))
                q[c] = 1.0;
            else if (p_[c] == 1.0)
                q[c] = detail::kInf;
            else
                q[c] = p_[c] / (p_[c] - 1.0);
        }
        return ExponentField(grid_, std::move(q));
    }

private:
    void finalize() {
        inf_cells_ = 0;
        finite_cells_ = 0;
        p_minus_ = detail::kInf;
        p_plus_ = 1.0;
        for (double p : p_) {
            if (std::isinf(p)) {
                ++inf_cells_;
                continue;
            }
            if (!(p >= 1.0) || std::isnan(p))
                throw config_error("exponent values must satisfy p(x) >= 1");
            p_minus_ = std::min(p_minus_, p);
            p_plus_ = std::max(p_plus_, p);
            ++finite_cells_;
        }
        if (finite_cells_ == 0) p_minus_ = p_plus_ = detail::kInf;
    }

    GridPtr grid_;
    std::vector<double> p_;
    int inf_cells_ = 0;
    int finite_cells_ = 0;
    double p_minus_ = 1.0;
    double p_plus_ = 1.0;
};

inline ExponentField conjugate(const ExponentField& p) { return p.conjugate(); }

// Branch exponents: each is p_minus or p_plus of the relevant field,
// selected by whether the relevant norm is below 1 or at least 1.
struct ExtremalExponents {
    double p_star = 0.0;
    double r_star = 0.0;
    double l_star = 0.0;
    double b_star = 0.0;
};

// l* and b* for the power-norm identity, chosen from the size of ||f||.
inline std::pair<double, double> lower_upper_exponents(const ExponentField& p,
                                                       double norm) {
    if (norm < 1.0) return {p.p_plus(), p.p_minus()};
    return {p.p_minus(), p.p_plus()};
}

// p* from the gradient norm, r* from the datum norm; norm exactly 1 takes
// the ">= 1" branch.
inline double p_star_of(const ExponentField& p, double grad_norm) {
    return grad_norm < 1.0 ? p.p_plus() : p.p_minus();
}
inline double r_star_of(const ExponentField& p, double datum_norm) {
    return datum_norm >= 1.0 ? p.p_plus() : p.p_minus();
}

}  // namespace vplap
