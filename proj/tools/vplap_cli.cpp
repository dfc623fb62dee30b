// Command-line front end: norm / solve / poincare / verify.
//
// Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
// 4 verification failures present.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vplap/config.hpp"
#include "vplap/poincare.hpp"
#include "vplap/random_fields.hpp"

namespace fs = std::filesystem;
using vplap::json;

namespace {

json verdicts_json(const std::vector<vplap::ChainVerdict>& vs) {
    json out = json::array();
    for (const auto& v : vs)
        out.push_back({{"name", v.name}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"ok", v.ok}});
    return out;
}

json solver_report_json(const vplap::SolverReport& rep,
                        const vplap::RegularityReport& reg) {
    json out;
    out["schema_version"] = vplap::kSchemaVersion;
    out["converged"] = rep.converged;
    out["weak_residual"] = rep.weak_residual;
    out["iterations"] = rep.iterations;
    out["epsilon_final"] = rep.epsilon_final;
    out["u_norm"] = rep.u_norm;
    out["g_norm"] = rep.g_norm;
    out["f_norm"] = rep.f_norm;
    out["p_star"] = rep.exponents.p_star;
    out["r_star"] = rep.exponents.r_star;
    out["l_star"] = rep.exponents.l_star;
    out["b_star"] = rep.exponents.b_star;
    out["C1_observed"] = rep.C1_observed;
    out["energy_initial"] = rep.energy_trace.empty() ? 0.0 : rep.energy_trace.front();
    out["energy_final"] = rep.energy_trace.empty() ? 0.0 : rep.energy_trace.back();
    out["chain_verdicts"] = verdicts_json(reg.verdicts);
    out["chain_ok"] = reg.all_ok;
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw vplap::config_error("cannot open output file " + path.string());
    os << text;
}

template <class Field>
void write_csv(const fs::path& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw vplap::config_error("cannot open output file " + path.string());
    vplap::dump_csv(os, f);
}

vplap::RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw vplap::config_error("cannot read config file " + path);
    json doc = json::parse(is, nullptr, true, true);
    return vplap::parse_run_config(doc);
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> tol;
};

void apply_overrides(vplap::RunConfig& rc, const CommonFlags& flags) {
    if (flags.seed) rc.seed = *flags.seed;
    if (flags.out_dir) rc.out_dir = *flags.out_dir;
    if (flags.tol) rc.solver.tol = *flags.tol;
}

int cmd_norm(const vplap::RunConfig& rc) {
    json out;
    out["schema_version"] = vplap::kSchemaVersion;
    out["modular"] = vplap::modular(rc.f, rc.p);
    out["luxemburg_norm"] = vplap::luxemburg_norm(rc.f, rc.p);
    out["weighted_norm"] = vplap::weighted_norm(rc.f, rc.v, rc.p);
    out["lq_gradient_norm"] = vplap::lq_norm(vplap::gradient(rc.f), rc.Q, rc.p);
    out["p_minus"] = rc.p.p_minus();
    out["p_plus"] = rc.p.p_plus();
    fs::create_directories(rc.out_dir);
    write_text(fs::path(rc.out_dir) / "norm.json", out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_solve(const vplap::RunConfig& rc) {
    vplap::ProblemData data = vplap::problem_data(rc);
    vplap::SolverReport rep = vplap::solve(data, rc.solver);
    vplap::RegularityReport reg = vplap::regularity_check(rep, data);
    const json out = solver_report_json(rep, reg);
    fs::create_directories(rc.out_dir);
    write_text(fs::path(rc.out_dir) / "solve.json", out.dump(2) + "\n");
    write_csv(fs::path(rc.out_dir) / "u.csv", rep.solution.u);
    write_csv(fs::path(rc.out_dir) / "g.csv", rep.solution.g);
    std::cout << out.dump(2) << "\n";
    return rep.converged ? 0 : 3;
}

int cmd_poincare(const vplap::RunConfig& rc) {
    vplap::ProblemData data = vplap::problem_data(rc);
    std::mt19937_64 rng(rc.seed);
    vplap::PoincareEstimate est = vplap::estimate_C0(data, rc.restarts, rng);
    json out;
    out["schema_version"] = vplap::kSchemaVersion;
    out["C0_lower"] = est.C0_lower;
    out["restarts"] = est.restarts;
    out["converged"] = est.converged;
    fs::create_directories(rc.out_dir);
    write_text(fs::path(rc.out_dir) / "poincare.json", out.dump(2) + "\n");
    write_csv(fs::path(rc.out_dir) / "witness.csv", est.witness);
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify: the randomized inequality battery.  Every check reports its worst
// margin; failures are data, not errors.

struct Battery {
    json checks = json::array();
    bool all_ok = true;

    void add(const std::string& name, bool ok, double worst_margin, int trials) {
        checks.push_back({{"name", name},
                          {"ok", ok},
                          {"worst_margin", worst_margin},
                          {"trials", trials}});
        all_ok = all_ok && ok;
    }
};

void battery_luxemburg(Battery& bat, std::mt19937_64& rng,
                       const std::vector<vplap::GridPtr>& grids) {
    const int trials = 150;
    bool ok = true;
    double worst = vplap::detail::kInf;
    std::uniform_real_distribution<double> cdist(-3.0, 3.0);
    for (int k = 0; k < trials; ++k) {
        const auto& grid = grids[k % grids.size()];
        vplap::ScalarField f = vplap::rnd::scalar_field(grid, rng, -2.0, 2.0);
        vplap::ScalarField g = vplap::rnd::scalar_field(grid, rng, -2.0, 2.0);
        vplap::ExponentField p = vplap::rnd::exponent_field(grid, rng);
        const double nf = vplap::luxemburg_norm(f, p);
        const double ng = vplap::luxemburg_norm(g, p);
        double c = cdist(rng);
        if (c == 0.0) c = 1.0;
        vplap::ScalarField cf = f;
        cf *= c;
        const double hom = std::abs(vplap::luxemburg_norm(cf, p) - std::abs(c) * nf);
        const double tri = vplap::luxemburg_norm(f + g, p) - (nf + ng);
        double norm_mod = 0.0;
        if (nf > 0.0) {
            vplap::ScalarField fn = f;
            fn *= 1.0 / nf;
            norm_mod = std::abs(vplap::modular(fn, p) - 1.0);
        }
        const double scale = std::max(1.0, nf + ng);
        const double margin =
            std::min({1e-10 - hom / std::max(1.0, std::abs(c) * nf),
                      1e-10 - tri / scale, 1e-10 - norm_mod});
        worst = std::min(worst, margin);
        ok = ok && margin >= 0.0;
    }
    bat.add("luxemburg_homogeneity_triangle_unit_modular", ok, worst, trials);
}

void battery_inequalities(Battery& bat, std::mt19937_64& rng,
                          const std::vector<vplap::GridPtr>& grids,
                          double holder_K) {
    const int trials = 150;
    bool h_ok = true, m_ok = true, p_ok = true, e_ok = true;
    double h_w = vplap::detail::kInf, m_w = vplap::detail::kInf,
           p_w = vplap::detail::kInf, e_w = vplap::detail::kInf;
    for (int k = 0; k < trials; ++k) {
        const auto& grid = grids[k % grids.size()];
        vplap::ScalarField f = vplap::rnd::scalar_field(grid, rng, -2.0, 2.0);
        vplap::ScalarField g = vplap::rnd::scalar_field(grid, rng, -2.0, 2.0);
        vplap::ExponentField p = vplap::rnd::exponent_field(grid, rng);

        const auto hr = vplap::holder_check(f, g, p, holder_K);
        h_w = std::min(h_w, (hr.rhs - hr.lhs) / std::max(1.0, hr.rhs));
        h_ok = h_ok && hr.ok;

        const auto mr = vplap::mod_norm_bounds_check(f, p);
        const double msc = std::max({1.0, mr.upper, mr.rho});
        m_w = std::min(m_w, std::min(mr.rho - mr.lower, mr.upper - mr.rho) / msc);
        m_ok = m_ok && mr.ok;

        const auto pr = vplap::power_norm_check(f, p);
        const double psc = std::max({1.0, pr.upper, pr.mid});
        p_w = std::min(p_w, std::min(pr.mid - pr.lower, pr.upper - pr.mid) / psc);
        p_ok = p_ok && pr.ok;

        vplap::VectorField vf = vplap::rnd::vector_field(grid, rng, -2.0, 2.0);
        vplap::MatrixField Q = vplap::rnd::matrix_field(grid, rng, 0.0, 3.0);
        const auto er = vplap::component_norm_equivalence_check(vf, Q, p);
        const double esc = std::max({1.0, er.upper, er.mid});
        e_w = std::min(e_w, std::min(er.mid - er.lower, er.upper - er.mid) / esc);
        e_ok = e_ok && er.ok;
    }
    bat.add("holder_K", h_ok, h_w, trials);
    bat.add("mod_norm_sandwich", m_ok, m_w, trials);
    bat.add("power_norm_sandwich", p_ok, p_w, trials);
    bat.add("component_norm_equivalence", e_ok, e_w, trials);
}

void battery_minty(Battery& bat, std::mt19937_64& rng) {
    vplap::GridPtr grid = vplap::build_grid_1d(0.0, 1.0, 16);
    vplap::ExponentField p = vplap::rnd::exponent_field(grid, rng, 1.3, 4.0);
    vplap::ScalarField v(grid, 1.0);
    vplap::MatrixField Q = vplap::rnd::half_degenerate_matrix_field(grid, rng);
    vplap::ScalarField f =
        vplap::ScalarField::from_function(grid, [](double x) { return std::cos(M_PI * x); });
    vplap::ProblemData data(grid, p, v, Q, f);

    auto mono = vplap::monotonicity_check(data, 100, [&]() {
        return std::pair(vplap::rnd::pair(grid, rng), vplap::rnd::pair(grid, rng));
    });
    bat.add("monotonicity", mono.ok, mono.worst_scaled, mono.trials);

    bool hemi_ok = true;
    double hemi_worst = vplap::detail::kInf;
    for (double pc : {1.5, 3.0}) {
        vplap::ProblemData dc(grid, vplap::ExponentField::constant(grid, pc), v,
                              vplap::MatrixField::identity(grid), f);
        const auto hr = vplap::hemicontinuity_check(dc, vplap::rnd::pair(grid, rng),
                                                    vplap::rnd::pair(grid, rng), 0.3);
        hemi_ok = hemi_ok && hr.ok;
        hemi_worst = std::min(
            hemi_worst, hr.fitted_exponent - (std::min(1.0, pc - 1.0) - 0.1));
    }
    bat.add("hemicontinuity", hemi_ok, hemi_worst, 2);

    vplap::ProblemData classical(grid, vplap::ExponentField::constant(grid, 2.0), v,
                                 vplap::MatrixField::identity(grid), f);
    std::mt19937_64 c0_rng(7);
    const double C0 = vplap::estimate_C0(classical, 3, c0_rng).C0_lower;
    auto coer = vplap::coercivity_check(classical, 20, C0, [&](double lambda) {
        return vplap::rnd::large_mean_zero_pair(classical, rng, lambda);
    });
    bat.add("coercivity", coer.ok, coer.worst_margin, coer.samples);
}

void battery_poincare(Battery& bat, std::mt19937_64& rng) {
    vplap::GridPtr grid = vplap::build_grid_1d(0.0, 1.0, 24);
    vplap::ScalarField v(grid, 1.0);
    vplap::ScalarField f =
        vplap::ScalarField::from_function(grid, [](double x) { return std::cos(M_PI * x); });
    vplap::ProblemData data(grid, vplap::ExponentField::constant(grid, 2.0), v,
                            vplap::MatrixField::identity(grid), f);
    std::vector<vplap::ScalarField> probes;
    probes.push_back(f);
    probes.push_back(vplap::ScalarField::from_function(grid, [](double x) { return x; }));
    probes.push_back(vplap::rnd::scalar_field(grid, rng));
    const auto reports = vplap::neumann_implies_poincare_check(data, probes);
    bool ok = true;
    double worst = vplap::detail::kInf;
    for (const auto& r : reports) {
        if (r.skipped) continue;
        ok = ok && r.chain_ok && r.solver_converged;
        worst = std::min(worst, r.implied_constant - r.measured_ratio);
    }
    bat.add("neumann_implies_poincare_chain", ok, worst,
            static_cast<int>(reports.size()));

    // scale/shift invariance of the ratio
    bool inv_ok = true;
    double inv_worst = vplap::detail::kInf;
    std::uniform_real_distribution<double> cd(0.3, 3.0), dd(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        vplap::ScalarField u = vplap::rnd::scalar_field(grid, rng);
        const double r0 = vplap::poincare_ratio(u, data);
        vplap::ScalarField cu = u;
        cu *= cd(rng);
        const double shift = dd(rng);
        for (int c = 0; c < cu.size(); ++c) cu[c] += shift;
        const double diff = std::abs(vplap::poincare_ratio(cu, data) - r0);
        inv_worst = std::min(inv_worst, 1e-10 - diff / std::max(1.0, r0));
        inv_ok = inv_ok && diff <= 1e-10 * std::max(1.0, r0);
    }
    bat.add("poincare_ratio_invariance", inv_ok, inv_worst, 50);
}

void battery_appendix(Battery& bat, std::mt19937_64& rng,
                      const std::vector<vplap::GridPtr>& grids) {
    const int trials = 150;
    bool ok = true;
    double worst = vplap::detail::kInf;
    std::uniform_real_distribution<double> pd(1.2, 6.0);
    for (int k = 0; k < trials; ++k) {
        const auto& grid = grids[k % grids.size()];
        vplap::ScalarField f = vplap::rnd::scalar_field(grid, rng, -2.0, 2.0);
        vplap::ScalarField v = vplap::rnd::weight_field(grid, rng);
        const auto rep = vplap::average_equivalence_check(f, v, pd(rng));
        for (const auto& cv : rep.verdicts)
            worst = std::min(worst, (cv.rhs - cv.lhs) / std::max(1.0, cv.rhs));
        ok = ok && rep.ok;
    }
    bat.add("average_equivalence", ok, worst, trials);
}

int cmd_verify(const vplap::RunConfig& rc) {
    std::mt19937_64 rng(rc.seed);
    std::vector<vplap::GridPtr> grids{vplap::build_grid_1d(0.0, 1.0, 16),
                                      vplap::build_grid_2d(0.0, 1.0, 6, 0.0, 1.0, 5)};
    Battery bat;
    battery_luxemburg(bat, rng, grids);
    battery_inequalities(bat, rng, grids, rc.holder_constant);
    battery_minty(bat, rng);
    battery_poincare(bat, rng);
    battery_appendix(bat, rng, grids);

    json out;
    out["schema_version"] = vplap::kSchemaVersion;
    out["seed"] = rc.seed;
    out["holder_constant"] = rc.holder_constant;
    out["checks"] = bat.checks;
    out["all_ok"] = bat.all_ok;
    fs::create_directories(rc.out_dir);
    write_text(fs::path(rc.out_dir) / "verify.json", out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return bat.all_ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variable-exponent Lebesgue space toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", flags.config_path, "config JSON path");
        if (config_required) opt->required();
        sub->add_option("--seed", flags.seed, "RNG seed");
        sub->add_option("--out", flags.out_dir, "output directory");
        sub->add_option("--tol", flags.tol, "solver tolerance override");
    };

    CLI::App* norm = app.add_subcommand("norm", "evaluate norms of the configured fields");
    CLI::App* solve = app.add_subcommand("solve", "solve the Neumann problem");
    CLI::App* poincare = app.add_subcommand("poincare", "estimate the Poincare constant");
    CLI::App* verify = app.add_subcommand("verify", "run the inequality battery");
    add_common(norm, true);
    add_common(solve, true);
    add_common(poincare, true);
    add_common(verify, false);

    CLI11_PARSE(app, argc, argv);

    try {
        vplap::RunConfig rc =
            flags.config_path.empty()
                ? vplap::parse_run_config(
                      json{{"schema_version", vplap::kSchemaVersion}})
                : load_config(flags.config_path);
        apply_overrides(rc, flags);
        if (norm->parsed()) return cmd_norm(rc);
        if (solve->parsed()) return cmd_solve(rc);
        if (poincare->parsed()) return cmd_poincare(rc);
        if (verify->parsed()) return cmd_verify(rc);
    } catch (const vplap::config_error& e) {
        std::cout << json{{"error", "validation"}, {"message", e.what()}}.dump(2) << "\n";
        return 2;
    } catch (const vplap::shape_error& e) {
        std::cout << json{{"error", "validation"}, {"message", e.what()}}.dump(2) << "\n";
        return 2;
    } catch (const vplap::domain_error& e) {
        std::cout << json{{"error", "validation"}, {"message", e.what()}}.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cout << json{{"error", "internal"}, {"message", e.what()}}.dump(2) << "\n";
        return 1;
    }
    return 0;
}
