#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "vplap/exponent.hpp"
#include "vplap/grid.hpp"
#include "vplap/norms.hpp"

namespace vplap {

// Symmetric PSD n x n matrix per cell, n = grid dimension.  Entries are
// stored row-major; construction symmetrizes nothing, inputs must already
// be symmetric.
class MatrixField {
public:
    explicit MatrixField(GridPtr grid)
        : grid_(std::move(grid)), n_(grid_->dim()),
          entries_(grid_->cells() * n_ * n_, 0.0) {}

    static MatrixField identity(GridPtr grid) {
        MatrixField q(std::move(grid));
        for (int c = 0; c < q.cells(); ++c)
            for (int i = 0; i < q.n_; ++i) q.at(c, i, i) = 1.0;
        return q;
    }

    static MatrixField scalar(GridPtr grid, double s) {
        MatrixField q = identity(std::move(grid));
        for (double& e : q.entries_) e *= s;
        return q;
    }

    static MatrixField scaled(const MatrixField& q0, double s) {
        MatrixField q = q0;
        for (double& e : q.entries_) e *= s;
        return q;
    }

    const GridPtr& grid() const { return grid_; }
    int n() const { return n_; }
    int cells() const { return grid_->cells(); }
    double at(int c, int i, int j) const { return entries_[(c * n_ + i) * n_ + j]; }
    double& at(int c, int i, int j) { return entries_[(c * n_ + i) * n_ + j]; }

    void check_symmetric(double tol = 0.0) const {
        for (int c = 0; c < cells(); ++c)
            for (int i = 0; i < n_; ++i)
                for (int j = i + 1; j < n_; ++j)
                    if (std::abs(at(c, i, j) - at(c, j, i)) > tol)
                        throw domain_error("matrix field is not symmetric");
    }

    // y = Q(c) x
    void apply(int c, const double* x, double* y) const {
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int j = 0; j < n_; ++j) s += at(c, i, j) * x[j];
            y[i] = s;
        }
    }

    double quadratic_form(int c, const double* x) const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) s += x[i] * at(c, i, j) * x[j];
        return s;
    }

private:
    GridPtr grid_;
    int n_;
    std::vector<double> entries_;
};

// Per-cell eigendecomposition.  Eigenvalues descending; eigenvectors are
// stored column-major (vector(c, j) is the j-th eigenvector), sign-fixed so
// the first component of magnitude > 1e-12 is positive.
class EigenData {
public:
    EigenData(GridPtr grid, int n)
        : grid_(std::move(grid)), n_(n),
          lambda_(grid_->cells() * n_, 0.0),
          vectors_(grid_->cells() * n_ * n_, 0.0) {}

    const GridPtr& grid() const { return grid_; }
    int n() const { return n_; }
    int cells() const { return grid_->cells(); }
    double eigenvalue(int c, int j) const { return lambda_[c * n_ + j]; }
    double& eigenvalue(int c, int j) { return lambda_[c * n_ + j]; }
    // component i of eigenvector j at cell c
    double vector(int c, int j, int i) const { return vectors_[(c * n_ + j) * n_ + i]; }
    double& vector(int c, int j, int i) { return vectors_[(c * n_ + j) * n_ + i]; }

private:
    GridPtr grid_;
    int n_;
    std::vector<double> lambda_;
    std::vector<double> vectors_;
};

namespace detail {

// Cyclic Jacobi for a small dense symmetric matrix.  a is row-major n x n
// and is destroyed; v receives the (row-major) accumulated rotations so
// that columns of v are eigenvectors.
inline void jacobi_symmetric(int n, std::vector<double>& a, std::vector<double>& v) {
    v.assign(n * n, 0.0);
    for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
    if (n == 1) return;
    auto A = [&](int i, int j) -> double& { return a[i * n + j]; };
    auto V = [&](int i, int j) -> double& { return v[i * n + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
        double diag = 0.0;
        for (int i = 0; i < n; ++i) diag = std::max(diag, std::abs(A(i, i)));
        if (off <= 1e-30 * std::max(1.0, diag * diag)) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
}

inline void fix_sign(int n, double* vec) {
    for (int i = 0; i < n; ++i) {
        if (std::abs(vec[i]) > 1e-12) {
            if (vec[i] < 0.0)
                for (int k = 0; k < n; ++k) vec[k] = -vec[k];
            return;
        }
    }
}

}  // namespace detail

inline EigenData eigendecompose(const MatrixField& Q) {
    Q.check_symmetric(0.0);
    const int n = Q.n();
    EigenData ed(Q.grid(), n);
    std::vector<double> a(n * n), v(n * n);
    std::vector<int> order(n);
    for (int c = 0; c < Q.cells(); ++c) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a[i * n + j] = Q.at(c, i, j);
        detail::jacobi_symmetric(n, a, v);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int i, int j) { return a[i * n + i] > a[j * n + j]; });

        double lam_max = 0.0;
        for (int i = 0; i < n; ++i) lam_max = std::max(lam_max, std::abs(a[i * n + i]));
        for (int j = 0; j < n; ++j) {
            double lam = a[order[j] * n + order[j]];
            if (lam < 0.0) {
                if (lam < -1e-10 * std::max(1.0, lam_max))
                    throw domain_error("matrix field is not PSD within tolerance");
                lam = 0.0;
            }
            ed.eigenvalue(c, j) = lam;
            for (int i = 0; i < n; ++i) ed.vector(c, j, i) = v[i * n + order[j]];
        }

        // Repeated eigenvalues: rebuild the eigenspace basis by Gram-Schmidt
        // against the axis basis so the decomposition is reproducible.
        int j = 0;
        while (j < n) {
            int k = j + 1;
            while (k < n && std::abs(ed.eigenvalue(c, k) - ed.eigenvalue(c, j)) <=
                                1e-12 * std::max(1.0, lam_max))
                ++k;
            if (k - j > 1) {
                // project axis vectors e_0, e_1, ... onto the eigenspace
                std::vector<double> basis;
                for (int axis = 0; axis < n && static_cast<int>(basis.size()) < (k - j) * n;
                     ++axis) {
                    std::vector<double> w(n, 0.0);
                    for (int jj = j; jj < k; ++jj) {
                        const double dot = ed.vector(c, jj, axis);
                        for (int i = 0; i < n; ++i) w[i] += dot * ed.vector(c, jj, i);
                    }
                    for (std::size_t b = 0; b < basis.size() / n; ++b) {
                        double dot = 0.0;
                        for (int i = 0; i < n; ++i) dot += w[i] * basis[b * n + i];
                        for (int i = 0; i < n; ++i) w[i] -= dot * basis[b * n + i];
                    }
                    double nrm = 0.0;
                    for (int i = 0; i < n; ++i) nrm += w[i] * w[i];
                    nrm = std::sqrt(nrm);
                    if (nrm > 1e-8) {
                        for (int i = 0; i < n; ++i) basis.push_back(w[i] / nrm);
                    }
                }
                for (int jj = j; jj < k && (jj - j + 1) * n <= static_cast<int>(basis.size());
                     ++jj)
                    for (int i = 0; i < n; ++i)
                        ed.vector(c, jj, i) = basis[(jj - j) * n + i];
            }
            j = k;
        }
        for (int jj = 0; jj < n; ++jj) {
            double* vec = &ed.vector(c, jj, 0);
            detail::fix_sign(n, vec);
        }
    }
    return ed;
}

inline MatrixField sqrt_field(const MatrixField& Q) {
    const EigenData ed = eigendecompose(Q);
    const int n = Q.n();
    MatrixField r(Q.grid());
    for (int c = 0; c < Q.cells(); ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k)
                    s += ed.vector(c, k, i) * std::sqrt(ed.eigenvalue(c, k)) *
                         ed.vector(c, k, j);
                r.at(c, i, j) = s;
            }
    return r;
}

// gamma(x) = |Q(x)|_op, the largest eigenvalue per cell.
inline ScalarField gamma(const MatrixField& Q) {
    const EigenData ed = eigendecompose(Q);
    ScalarField g(Q.grid());
    for (int c = 0; c < Q.cells(); ++c) g[c] = ed.eigenvalue(c, 0);
    return g;
}

// |sqrt(Q) g| per cell, evaluated through the identity |sqrt(Q) x|^2 = x^T Q x.
inline ScalarField sqrtq_magnitude(const VectorField& g, const MatrixField& Q) {
    detail::require_same_grid(g.grid(), Q.grid());
    ScalarField s(g.grid());
    for (int c = 0; c < g.cells(); ++c) {
        const double* x = &g.values()[c * g.dim()];
        s[c] = std::sqrt(std::max(0.0, Q.quadratic_form(c, x)));
    }
    return s;
}

inline double lq_norm(const VectorField& g, const MatrixField& Q,
                      const ExponentField& p) {
    return luxemburg_norm(sqrtq_magnitude(g, Q), p);
}

struct NormEquivalenceReport {
    double lower = 0.0;   // (1/n) sum_j ||f~_j||
    double mid = 0.0;     // lq_norm
    double upper = 0.0;   // sum_j ||f~_j||
    bool ok = false;
};

// Component-norm equivalence against the measurable eigenbasis of Q.
inline NormEquivalenceReport component_norm_equivalence_check(
    const VectorField& g, const MatrixField& Q, const ExponentField& p) {
    const EigenData ed = eigendecompose(Q);
    const int n = Q.n();
    NormEquivalenceReport rep;
    rep.mid = lq_norm(g, Q, p);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        ScalarField fj(g.grid());
        ScalarField wj(g.grid());
        for (int c = 0; c < g.cells(); ++c) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += g.component(c, i) * ed.vector(c, j, i);
            fj[c] = dot;
            wj[c] = std::sqrt(ed.eigenvalue(c, j));
        }
        sum += weighted_norm(fj, wj, p);
    }
    rep.lower = sum / n;
    rep.upper = sum;
    const double slack = 1e-10 * std::max({1.0, rep.lower, rep.mid, rep.upper});
    rep.ok = rep.lower <= rep.mid + slack && rep.mid <= rep.upper + slack;
    return rep;
}

}  // namespace vplap
