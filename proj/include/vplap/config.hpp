#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vplap/neumann.hpp"

namespace vplap {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace cfg {

inline double number_or_inf(const json& j, const char* what) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return detail::kInf;
        throw config_error(std::string(what) + ": unrecognized value '" + s + "'");
    }
    if (!j.is_number()) throw config_error(std::string(what) + ": expected a number");
    return j.get<double>();
}

inline GridPtr parse_grid(const json& j) {
    if (!j.is_object()) throw config_error("domain: expected an object");
    GridSpec spec;
    spec.dim = j.value("dim", 1);
    if (spec.dim < 1 || spec.dim > 2) throw config_error("domain.dim must be 1 or 2");
    const auto lo = j.value("lo", std::vector<double>(spec.dim, 0.0));
    const auto hi = j.value("hi", std::vector<double>(spec.dim, 1.0));
    const auto res = j.value("resolution", std::vector<int>(spec.dim, 64));
    if (static_cast<int>(lo.size()) < spec.dim ||
        static_cast<int>(hi.size()) < spec.dim ||
        static_cast<int>(res.size()) < spec.dim)
        throw config_error("domain: lo/hi/resolution need one entry per axis");
    for (int a = 0; a < spec.dim; ++a) {
        spec.lo[a] = lo[a];
        spec.hi[a] = hi[a];
        spec.resolution[a] = res[a];
    }
    return build_grid(spec);
}

// Scalar field spec, shared by weight and datum:
//   constant | affine (base + slope . x) | cosine (amp * prod cos(k pi xhat))
//   | table (one value per cell, traversal order)
inline ScalarField parse_scalar_field(const json& j, const GridPtr& grid,
                                      const char* what) {
    if (j.is_number()) return ScalarField(grid, j.get<double>());
    if (!j.is_object()) throw config_error(std::string(what) + ": expected an object");
    const std::string kind = j.value("kind", "constant");
    if (kind == "constant") {
        return ScalarField(grid, j.value("value", 0.0));
    }
    if (kind == "affine") {
        const double base = j.value("base", 0.0);
        const auto slope = j.value("slope", std::vector<double>{0.0, 0.0});
        ScalarField f(grid, base);
        for (int c = 0; c < f.size(); ++c) {
            const auto x = grid->cell_center(c);
            for (int a = 0; a < grid->dim() && a < static_cast<int>(slope.size()); ++a)
                f[c] += slope[a] * x[a];
        }
        return f;
    }
    if (kind == "cosine") {
        const double amp = j.value("amplitude", 1.0);
        const auto freq = j.value("frequency", std::vector<double>{1.0, 0.0});
        ScalarField f(grid, 0.0);
        for (int c = 0; c < f.size(); ++c) {
            const auto x = grid->cell_center(c);
            double val = amp;
            for (int a = 0; a < grid->dim(); ++a) {
                const double k = a < static_cast<int>(freq.size()) ? freq[a] : 0.0;
                const double xh = (x[a] - grid->lower(a)) / (grid->upper(a) - grid->lower(a));
                val *= std::cos(k * M_PI * xh);
            }
            f[c] = val;
        }
        return f;
    }
    if (kind == "table") {
        const auto& vals = j.at("values");
        if (static_cast<int>(vals.size()) != grid->cells())
            throw config_error(std::string(what) + ".values: need one value per cell");
        ScalarField f(grid);
        for (int c = 0; c < f.size(); ++c) f[c] = vals[c].get<double>();
        return f;
    }
    throw config_error(std::string(what) + ": unknown kind '" + kind + "'");
}

// Exponent spec: constant | affine | piecewise-axis | table.
inline ExponentField parse_exponent(const json& j, const GridPtr& grid) {
    if (j.is_number()) return ExponentField::constant(grid, j.get<double>());
    if (!j.is_object()) throw config_error("exponent: expected an object");
    const std::string kind = j.value("kind", "constant");
    if (kind == "constant")
        return ExponentField::constant(grid, number_or_inf(j.at("value"), "exponent.value"));
    if (kind == "affine") {
        const double base = j.value("base", 2.0);
        const auto slope = j.value("slope", std::vector<double>{0.0, 0.0});
        std::vector<double> p(grid->cells(), base);
        for (int c = 0; c < grid->cells(); ++c) {
            const auto x = grid->cell_center(c);
            for (int a = 0; a < grid->dim() && a < static_cast<int>(slope.size()); ++a)
                p[c] += slope[a] * x[a];
        }
        return ExponentField(grid, std::move(p));
    }
    if (kind == "piecewise-axis") {
        const int axis = j.value("axis", 0);
        if (axis < 0 || axis >= grid->dim())
            throw config_error("exponent.axis out of range");
        const auto breaks = j.value("breakpoints", std::vector<double>{});
        const auto& vals = j.at("values");
        if (vals.size() != breaks.size() + 1)
            throw config_error("exponent: values must have breakpoints.size()+1 entries");
        std::vector<double> parsed(vals.size());
        for (std::size_t k = 0; k < vals.size(); ++k)
            parsed[k] = number_or_inf(vals[k], "exponent.values");
        std::vector<double> p(grid->cells());
        for (int c = 0; c < grid->cells(); ++c) {
            const double x = grid->cell_center(c)[axis];
            std::size_t k = 0;
            while (k < breaks.size() && x >= breaks[k]) ++k;
            p[c] = parsed[k];
        }
        return ExponentField(grid, std::move(p));
    }
    if (kind == "table") {
        const auto& vals = j.at("values");
        if (static_cast<int>(vals.size()) != grid->cells())
            throw config_error("exponent.values: need one value per cell");
        std::vector<double> p(grid->cells());
        for (int c = 0; c < grid->cells(); ++c)
            p[c] = number_or_inf(vals[c], "exponent.values");
        return ExponentField(grid, std::move(p));
    }
    throw config_error("exponent: unknown kind '" + kind + "'");
}

// Matrix spec: identity | diagonal | constant-matrix | radial-degenerate | table.
inline MatrixField parse_matrix(const json& j, const GridPtr& grid) {
    const int n = grid->dim();
    if (j.is_null()) return MatrixField::identity(grid);
    if (j.is_number()) return MatrixField::scalar(grid, j.get<double>());
    if (!j.is_object()) throw config_error("matrix: expected an object");
    const std::string kind = j.value("kind", "identity");
    if (kind == "identity") return MatrixField::identity(grid);
    if (kind == "diagonal") {
        const auto d = j.value("entries", std::vector<double>(n, 1.0));
        if (static_cast<int>(d.size()) < n)
            throw config_error("matrix.entries: need one entry per axis");
        MatrixField Q(grid);
        for (int c = 0; c < Q.cells(); ++c)
            for (int i = 0; i < n; ++i) Q.at(c, i, i) = d[i];
        return Q;
    }
    if (kind == "constant-matrix") {
        const auto& rows = j.at("entries");
        if (static_cast<int>(rows.size()) != n)
            throw config_error("matrix.entries: need n rows");
        MatrixField Q(grid);
        for (int c = 0; c < Q.cells(); ++c)
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) Q.at(c, i, k) = rows[i][k].get<double>();
        return Q;
    }
    if (kind == "radial-degenerate") {
        // lambda_min(x) = |x - x0|^alpha along the radial direction; the
        // complementary eigenvalue is lambda_max
        const auto x0 = j.value("center", std::vector<double>{0.0, 0.0});
        const double alpha = j.value("alpha", 1.0);
        const double lam_max = j.value("lambda_max", 1.0);
        MatrixField Q(grid);
        for (int c = 0; c < Q.cells(); ++c) {
            const auto x = grid->cell_center(c);
            double r2 = 0.0;
            std::array<double, 2> dx{0.0, 0.0};
            for (int a = 0; a < n; ++a) {
                dx[a] = x[a] - (a < static_cast<int>(x0.size()) ? x0[a] : 0.0);
                r2 += dx[a] * dx[a];
            }
            const double r = std::sqrt(r2);
            const double lam_min = std::pow(r, alpha);
            if (n == 1) {
                Q.at(c, 0, 0) = lam_min;
                continue;
            }
            double e0 = 1.0, e1 = 0.0;
            if (r > 0.0) {
                e0 = dx[0] / r;
                e1 = dx[1] / r;
            }
            Q.at(c, 0, 0) = lam_min * e0 * e0 + lam_max * e1 * e1;
            Q.at(c, 1, 1) = lam_min * e1 * e1 + lam_max * e0 * e0;
            Q.at(c, 0, 1) = Q.at(c, 1, 0) = (lam_min - lam_max) * e0 * e1;
        }
        return Q;
    }
    if (kind == "table") {
        const auto& entries = j.at("entries");
        if (static_cast<int>(entries.size()) != grid->cells() * n * n)
            throw config_error("matrix.entries: need n*n values per cell");
        MatrixField Q(grid);
        int k = 0;
        for (int c = 0; c < Q.cells(); ++c)
            for (int i = 0; i < n; ++i)
                for (int jj = 0; jj < n; ++jj) Q.at(c, i, jj) = entries[k++].get<double>();
        return Q;
    }
    throw config_error("matrix: unknown kind '" + kind + "'");
}

}  // namespace cfg

struct RunConfig {
    GridPtr grid;
    ExponentField p;
    ScalarField v;
    MatrixField Q;
    ScalarField f;
    SolveOptions solver;
    int restarts = 8;              // poincare
    std::uint64_t seed = 20240801; // randomized batteries
    std::string out_dir = ".";
    double holder_constant = 4.0;  // debug override for the verify battery
};

inline RunConfig parse_run_config(const json& doc) {
    if (!doc.is_object()) throw config_error("config: expected a JSON object");
    const int version = doc.value("schema_version", 0);
    if (version != kSchemaVersion)
        throw config_error("config: unsupported schema_version (expected 1)");

    GridPtr grid = cfg::parse_grid(doc.value("domain", json::object()));
    ExponentField p = doc.contains("exponent")
                          ? cfg::parse_exponent(doc["exponent"], grid)
                          : ExponentField::constant(grid, 2.0);
    ScalarField v = doc.contains("weight")
                        ? cfg::parse_scalar_field(doc["weight"], grid, "weight")
                        : ScalarField(grid, 1.0);
    MatrixField Q = cfg::parse_matrix(doc.value("matrix", json()), grid);
    ScalarField f = doc.contains("datum")
                        ? cfg::parse_scalar_field(doc["datum"], grid, "datum")
                        : ScalarField(grid, 0.0);

    RunConfig rc{std::move(grid), std::move(p), std::move(v), std::move(Q),
                 std::move(f)};
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        rc.solver.tol = s.value("tol", -1.0);
        rc.solver.max_iters = s.value("max_iters", 50000);
        if (s.contains("epsilon_schedule"))
            rc.solver.epsilon_schedule = s["epsilon_schedule"].get<std::vector<double>>();
    }
    rc.restarts = doc.value("restarts", 8);
    rc.seed = doc.value("seed", std::uint64_t{20240801});
    rc.out_dir = doc.value("out", std::string{"."});
    rc.holder_constant = doc.value("debug_holder_constant", 4.0);
    return rc;
}

inline ProblemData problem_data(const RunConfig& rc) {
    return ProblemData(rc.grid, rc.p, rc.v, rc.Q, rc.f);
}

}  // namespace vplap
