#pragma once

#include <array>
#include <cstddef>
#include <type_traits>
#include <cstdio>
#include <memory>
#include <ostream>
#include <utility>
#include <vector>

#include "vplap/detail.hpp"

namespace vplap {

// Uniform cell-centered Cartesian grid over a bounded box in 1 or 2
// dimensions.  Cells are traversed lexicographically with axis 0 fastest;
// every reduction in the library walks cells in this order.
class Grid {
public:
    Grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
         std::array<int, 2> res)
        : dim_(dim), lo_(lo), hi_(hi), res_(res) {
        if (dim_ < 1 || dim_ > 2) throw config_error("grid dimension must be 1 or 2");
        cell_volume_ = 1.0;
        for (int a = 0; a < dim_; ++a) {
            if (!(hi_[a] > lo_[a])) throw config_error("grid extent must have b > a");
            if (res_[a] < 2) throw config_error("grid resolution must be >= 2 per axis");
            spacing_[a] = (hi_[a] - lo_[a]) / res_[a];
            cell_volume_ *= spacing_[a];
        }
    }

    int dim() const { return dim_; }
    int resolution(int axis) const { return res_[axis]; }
    double lower(int axis) const { return lo_[axis]; }
    double upper(int axis) const { return hi_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    double cell_volume() const { return cell_volume_; }

    double measure() const {
        double m = 1.0;
        for (int a = 0; a < dim_; ++a) m *= hi_[a] - lo_[a];
        return m;
    }

    int cells() const {
        int n = res_[0];
        if (dim_ == 2) n *= res_[1];
        return n;
    }

    // Lexicographic traversal: c = i + res_x * j.
    std::array<int, 2> multi_index(int c) const {
        if (dim_ == 1) return {c, 0};
        return {c % res_[0], c / res_[0]};
    }
    int flat_index(int i, int j) const { return dim_ == 1 ? i : i + res_[0] * j; }

    // Cell centers.
    double center(int axis, int idx) const {
        return lo_[axis] + (idx + 0.5) * spacing_[axis];
    }
    std::array<double, 2> cell_center(int c) const {
        const auto mi = multi_index(c);
        std::array<double, 2> x{center(0, mi[0]), 0.0};
        if (dim_ == 2) x[1] = center(1, mi[1]);
        return x;
    }

    bool same_as(const Grid& other) const { return this == &other; }

private:
    int dim_;
    std::array<double, 2> lo_, hi_;
    std::array<int, 2> res_;
    std::array<double, 2> spacing_{};
    double cell_volume_;
};

using GridPtr = std::shared_ptr<const Grid>;

struct GridSpec {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> resolution{2, 2};
};

inline GridPtr build_grid(const GridSpec& spec) {
    return std::make_shared<const Grid>(spec.dim, spec.lo, spec.hi, spec.resolution);
}

inline GridPtr build_grid_1d(double a, double b, int m) {
    return build_grid(GridSpec{1, {a, 0.0}, {b, 0.0}, {m, 2}});
}

inline GridPtr build_grid_2d(double ax, double bx, int mx, double ay, double by, int my) {
    return build_grid(GridSpec{2, {ax, ay}, {bx, by}, {mx, my}});
}

namespace detail {
inline void require_same_grid(const GridPtr& a, const GridPtr& b) {
    if (a.get() != b.get()) throw shape_error("fields live on different grids");
}
}  // namespace detail

class ScalarField {
public:
    explicit ScalarField(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), values_(grid_->cells(), fill) {}
    ScalarField(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != grid_->cells())
            throw shape_error("scalar field size does not match grid");
    }

    template <class F>
    static ScalarField from_function(GridPtr grid, F&& f) {
        ScalarField out(grid);
        const int n = grid->cells();
        for (int c = 0; c < n; ++c) {
            const auto x = grid->cell_center(c);
            if constexpr (std::is_invocable_v<F&, double, double>)
                out.values_[c] = f(x[0], x[1]);
            else
                out.values_[c] = f(x[0]);
        }
        return out;
    }

    const GridPtr& grid() const { return grid_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int c) const { return values_[c]; }
    double& operator[](int c) { return values_[c]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    ScalarField& operator+=(const ScalarField& o) {
        detail::require_same_grid(grid_, o.grid_);
        for (int c = 0; c < size(); ++c) values_[c] += o.values_[c];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        detail::require_same_grid(grid_, o.grid_);
        for (int c = 0; c < size(); ++c) values_[c] -= o.values_[c];
        return *this;
    }
    ScalarField& operator*=(double a) {
        for (double& v : values_) v *= a;
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double a, ScalarField f) { return f *= a; }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

class VectorField {
public:
    explicit VectorField(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), values_(grid_->cells() * grid_->dim(), fill) {}

    const GridPtr& grid() const { return grid_; }
    int dim() const { return grid_->dim(); }
    int cells() const { return grid_->cells(); }
    double component(int c, int axis) const { return values_[c * dim() + axis]; }
    double& component(int c, int axis) { return values_[c * dim() + axis]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double norm_at(int c) const {
        double s = 0.0;
        for (int a = 0; a < dim(); ++a) s += component(c, a) * component(c, a);
        return std::sqrt(s);
    }

    VectorField& operator+=(const VectorField& o) {
        detail::require_same_grid(grid_, o.grid_);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        detail::require_same_grid(grid_, o.grid_);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    VectorField& operator*=(double a) {
        for (double& v : values_) v *= a;
        return *this;
    }
    friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
    friend VectorField operator*(double a, VectorField f) { return f *= a; }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

// Midpoint-rule quadrature, compensated summation in traversal order.
inline double integrate(const ScalarField& f) {
    detail::KahanSum sum;
    const double vol = f.grid()->cell_volume();
    for (int c = 0; c < f.size(); ++c) sum.add(f[c] * vol);
    return sum.value();
}

template <class F>
double integrate_cellwise(const GridPtr& grid, F&& term) {
    detail::KahanSum sum;
    const double vol = grid->cell_volume();
    const int n = grid->cells();
    for (int c = 0; c < n; ++c) sum.add(term(c) * vol);
    return sum.value();
}

namespace detail {

// One axis of the finite-difference gradient: central stencils inside,
// second-order one-sided stencils at the two boundary cells (simple
// difference when the axis has only two cells).
template <class Get>
inline double fd_along_axis(const Get& u, int i, int m, double h) {
    if (m == 2) return (u(1) - u(0)) / h;
    if (i == 0) return (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * h);
    if (i == m - 1) return (3.0 * u(m - 1) - 4.0 * u(m - 2) + u(m - 3)) / (2.0 * h);
    return (u(i + 1) - u(i - 1)) / (2.0 * h);
}

// Scatter form of the same stencils (exact transpose of fd_along_axis).
template <class Put>
inline void fd_adjoint_along_axis(const Put& put, double w, int i, int m, double h) {
    if (m == 2) {
        put(1, w / h);
        put(0, -w / h);
        return;
    }
    if (i == 0) {
        put(0, -3.0 * w / (2.0 * h));
        put(1, 4.0 * w / (2.0 * h));
        put(2, -w / (2.0 * h));
    } else if (i == m - 1) {
        put(m - 1, 3.0 * w / (2.0 * h));
        put(m - 2, -4.0 * w / (2.0 * h));
        put(m - 3, w / (2.0 * h));
    } else {
        put(i + 1, w / (2.0 * h));
        put(i - 1, -w / (2.0 * h));
    }
}

}  // namespace detail

inline VectorField gradient(const ScalarField& u) {
    const GridPtr& g = u.grid();
    VectorField out(g);
    const int n = g->cells();
    for (int c = 0; c < n; ++c) {
        const auto mi = g->multi_index(c);
        for (int a = 0; a < g->dim(); ++a) {
            const int m = g->resolution(a);
            auto get = [&](int k) {
                int i = mi[0], j = mi[1];
                (a == 0 ? i : j) = k;
                return u[g->flat_index(i, j)];
            };
            out.component(c, a) = detail::fd_along_axis(get, mi[a], m, g->spacing(a));
        }
    }
    return out;
}

// Exact transpose of `gradient` as a linear map on cell values.
inline ScalarField gradient_adjoint(const VectorField& w) {
    const GridPtr& g = w.grid();
    ScalarField out(g, 0.0);
    const int n = g->cells();
    for (int c = 0; c < n; ++c) {
        const auto mi = g->multi_index(c);
        for (int a = 0; a < g->dim(); ++a) {
            const int m = g->resolution(a);
            auto put = [&](int k, double val) {
                int i = mi[0], j = mi[1];
                (a == 0 ? i : j) = k;
                out[g->flat_index(i, j)] += val;
            };
            detail::fd_adjoint_along_axis(put, w.component(c, a), mi[a], m, g->spacing(a));
        }
    }
    return out;
}

inline double weighted_average(const ScalarField& f, const ScalarField& v) {
    detail::require_same_grid(f.grid(), v.grid());
    for (int c = 0; c < v.size(); ++c)
        if (v[c] < 0.0) throw domain_error("weight must be non-negative");
    const double mass = integrate(v);
    if (!(mass > 0.0)) throw domain_error("degenerate weight: integrate(v) = 0");
    const double num = integrate_cellwise(f.grid(), [&](int c) { return f[c] * v[c]; });
    return num / mass;
}

// CSV dump: `cell_index, x_1[, x_2], value[, value_2]` in traversal order.
inline void dump_csv(std::ostream& os, const ScalarField& f) {
    const GridPtr& g = f.grid();
    os << (g->dim() == 1 ? "cell_index, x_1, value\n" : "cell_index, x_1, x_2, value\n");
    char buf[64];
    for (int c = 0; c < f.size(); ++c) {
        const auto x = g->cell_center(c);
        os << c;
        for (int a = 0; a < g->dim(); ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", x[a]);
            os << ", " << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", f[c]);
        os << ", " << buf << "\n";
    }
}

inline void dump_csv(std::ostream& os, const VectorField& f) {
    const GridPtr& g = f.grid();
    os << (g->dim() == 1 ? "cell_index, x_1, value\n"
                         : "cell_index, x_1, x_2, value, value_2\n");
    char buf[64];
    for (int c = 0; c < f.cells(); ++c) {
        const auto x = g->cell_center(c);
        os << c;
        for (int a = 0; a < g->dim(); ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", x[a]);
            os << ", " << buf;
        }
        for (int a = 0; a < g->dim(); ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", f.component(c, a));
            os << ", " << buf;
        }
        os << "\n";
    }
}

}  // namespace vplap
