#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "helmlab/config.hpp"
#include "helmlab/grid.hpp"
#include "helmlab/helmholtz.hpp"
#include "helmlab/identities.hpp"
#include "helmlab/multipliers.hpp"
#include "helmlab/potentials.hpp"
#include "helmlab/report.hpp"
#include "helmlab/spectral.hpp"
#include "helmlab/sweep.hpp"

namespace helmlab {

struct RunnerOptions {
    std::string config_path;
    std::string out_dir;  // overrides [output] path when nonempty
    long threads = 1;
    std::optional<std::uint64_t> seed_override;
};

namespace runner_detail {

inline RadialGrid load_grid(const Config& cfg, long n_override = 0) {
    const int top = 0;
    const int d = static_cast<int>(cfg.get_int(top, "dimension"));
    const int ell = static_cast<int>(cfg.get_int(top, "mode_l"));
    const int gs = cfg.unique_section("grid");
    const long n = n_override > 0 ? n_override : cfg.get_int(gs, "n");
    const double rmax = cfg.get_double(gs, "rmax");
    return RadialGrid::make(d, ell, static_cast<int>(n), rmax);
}

inline PotentialRole role_from_name(const std::string& s) {
    if (s == "V_repulsive") return PotentialRole::V_repulsive;
    if (s == "n_attractive") return PotentialRole::n_attractive;
    if (s == "V1_long_range") return PotentialRole::V1_long_range;
    if (s == "V2_long_range") return PotentialRole::V2_long_range;
    throw ConfigError("unknown potential role: " + s);
}

inline PotentialSpec load_potential(const Config& cfg, int sec, int dimension) {
    const std::string kind = cfg.get_string(sec, "kind");
    const std::string role_s = cfg.get_string(sec, "role", "V_repulsive");
    const PotentialRole role = role_from_name(role_s);
    const double scale = cfg.get_double(sec, "scale", 1.0);
    PotentialSpec p;
    if (kind == "zero") {
        p = PotentialSpec::zero_potential();
        p.role = role;
    } else if (kind == "inverse_power") {
        p = PotentialSpec::inverse_power(cfg.get_double(sec, "params.c"),
                                         cfg.get_double(sec, "params.gamma_pow"), role);
    } else if (kind == "smooth_inverse_power") {
        p = PotentialSpec::smooth_inverse_power(cfg.get_double(sec, "params.c"),
                                                cfg.get_double(sec, "params.alpha_pow"), role);
    } else if (kind == "exp_well") {
        p = PotentialSpec::exp_well(cfg.get_double(sec, "params.mu"), cfg.get_double(sec, "params.b"),
                                    cfg.get_double(sec, "params.gamma_g"),
                                    cfg.get_double(sec, "params.shift", 0.0), role);
    } else if (kind == "neumann_table") {
        const std::string path = cfg.get_string(sec, "params.file");
        std::ifstream in(path);
        if (!in) throw ConfigError("neumann_table: cannot open " + path);
        std::vector<double> rs, vs;
        double r, v;
        while (in >> r >> v) {
            rs.push_back(r);
            vs.push_back(v);
        }
        p = PotentialSpec::neumann_table(std::move(rs), std::move(vs), role);
    } else if (kind == "inv_one_plus_r") {
        // closed-form long-range profile c / (1+r)^power
        const double c = cfg.get_double(sec, "params.c");
        const double pw = cfg.get_double(sec, "params.power");
        p = PotentialSpec::manufactured(
            [c, pw](double r) { return c * std::pow(1.0 + r, -pw); },
            [c, pw](double r) { return -c * pw * std::pow(1.0 + r, -pw - 1.0); }, role, pw);
    } else if (kind == "zero_mode_example") {
        p = zero_mode_counterexample(dimension, cfg.get_double(sec, "params.lambda"));
        p.role = role;
    } else {
        throw ConfigError("unknown potential kind: " + kind);
    }
    return p.scaled(scale);
}

inline std::vector<PotentialSpec> load_potentials(const Config& cfg, int dimension) {
    std::vector<PotentialSpec> out;
    for (int sec : cfg.section_indices("potential")) out.push_back(load_potential(cfg, sec, dimension));
    return out;
}

inline ModeFunction load_rhs(const Config& cfg, const RadialGrid& g) {
    const int sec = cfg.unique_section("rhs");
    const std::string kind = cfg.get_string(sec, "kind");
    if (kind == "gaussian")
        return rhs_gaussian(g, cfg.get_double(sec, "center"), cfg.get_double(sec, "width"));
    if (kind == "shell") return rhs_shell(g, static_cast<int>(cfg.get_int(sec, "j")));
    if (kind == "manufactured") {
        // forcing of u* = r exp(-r^2) for the supported mode pairs
        ModeFunction f(g);
        for (int i = 0; i < g.n; ++i) {
            const double r = g.r(i);
            const double e = std::exp(-r * r);
            if (g.d == 3 && g.ell == 0)
                f.values[i] = (-4.0 * r * r * r + 10.0 * r - 2.0 / r) * e;
            else if (g.d == 2 && g.ell == 1)
                f.values[i] = (-4.0 * r * r * r + 8.0 * r) * e;
            else
                throw ConfigError("rhs.kind manufactured supports (d,l) = (3,0) or (2,1)");
        }
        return f;
    }
    if (kind == "custom_file") {
        const std::string path = cfg.get_string(sec, "path");
        std::ifstream in(path);
        if (!in) throw ConfigError("rhs custom_file: cannot open " + path);
        std::vector<double> rs;
        std::vector<complexd> vs;
        double r, re, im;
        while (in >> r >> re >> im) {
            rs.push_back(r);
            vs.push_back(complexd{re, im});
        }
        if (rs.size() < 2) throw ConfigError("rhs custom_file: need at least two samples");
        ModeFunction f(g);
        for (int i = 0; i < g.n; ++i) {
            const double x = g.r(i);
            if (x <= rs.front() || x >= rs.back()) continue;
            auto it = std::upper_bound(rs.begin(), rs.end(), x);
            const std::size_t j = static_cast<std::size_t>(it - rs.begin());
            const double t = (x - rs[j - 1]) / (rs[j] - rs[j - 1]);
            f.values[i] = vs[j - 1] * (1.0 - t) + vs[j] * t;
        }
        return f;
    }
    throw ConfigError("unknown rhs kind: " + kind);
}

inline ResolventProblem load_problem(const Config& cfg, const RadialGrid& g,
                                     std::vector<PotentialSpec> pots) {
    const int sec = cfg.unique_section("problem");
    ResolventProblem pb;
    pb.grid = g;
    pb.potentials = std::move(pots);
    pb.tau = cfg.get_double(sec, "tau");
    pb.epsilon = cfg.get_double(sec, "epsilon");
    const std::string sign = cfg.get_string(sec, "sign");
    if (sign == "plus")
        pb.sign = ResolventSign::plus;
    else if (sign == "minus")
        pb.sign = ResolventSign::minus;
    else
        throw ConfigError("problem.sign must be plus or minus");
    const std::string tau_term = cfg.get_string(sec, "tau_term", "minus_tau");
    if (tau_term == "minus_tau")
        pb.tau_sign = TauSign::minus;
    else if (tau_term == "plus_tau")
        pb.tau_sign = TauSign::plus;
    else
        throw ConfigError("problem.tau_term must be minus_tau or plus_tau");
    const std::string boundary = cfg.get_string(sec, "boundary", "dirichlet");
    if (boundary == "dirichlet") {
        pb.boundary = BoundaryKind::dirichlet;
    } else if (boundary == "sponge") {
        pb.boundary = BoundaryKind::sponge;
        pb.sponge.width_fraction = cfg.get_double(sec, "sponge.width", 0.25);
        pb.sponge.strength = cfg.get_double(sec, "sponge.strength", 1.5);
    } else {
        throw ConfigError("problem.boundary must be dirichlet or sponge");
    }
    pb.rhs = load_rhs(cfg, g);
    return pb;
}

struct OutputOptions {
    std::string dir = "out";
    std::string format = "csv";
};

inline OutputOptions load_output(const Config& cfg, const RunnerOptions& opt) {
    OutputOptions out;
    const int sec = cfg.optional_section("output");
    if (sec >= 0) {
        out.dir = cfg.get_string(sec, "path", out.dir);
        out.format = cfg.get_string(sec, "format", out.format);
        if (out.format != "csv" && out.format != "json")
            throw ConfigError("output.format must be csv or json");
    }
    if (!opt.out_dir.empty()) out.dir = opt.out_dir;
    return out;
}

inline MultiplierProfile load_multiplier(const Config& cfg, const RadialGrid& g) {
    const int sec = cfg.unique_section("multiplier");
    const std::string kind = cfg.get_string(sec, "kind");
    if (kind == "morawetz") return morawetz_profile(cfg.get_double(sec, "R"), g);
    if (kind == "piecewise") return piecewise_profile(cfg.get_double(sec, "R"), g);
    if (kind == "psi") return psi_weight(cfg.get_double(sec, "R"), g);
    if (kind == "appendix2") {
        const std::string hp = cfg.get_string(sec, "h_profile", "zero");
        HProfile h = HProfile::zero();
        if (hp == "rational")
            h = HProfile::rational(cfg.get_double(sec, "h_c"), cfg.get_double(sec, "h_p"));
        else if (hp != "zero")
            throw ConfigError("multiplier.h_profile must be zero or rational");
        return appendix2_construct(h, cfg.get_double(sec, "epsilon"), cfg.get_double(sec, "R"),
                                   cfg.get_double(sec, "alpha"), cfg.get_double(sec, "kappa"), g);
    }
    throw ConfigError("unknown multiplier kind: " + kind);
}

}  // namespace runner_detail

// ---------------------------------------------------------------------------
// subcommands; each returns the process exit code

inline int run_check_potential(const Config& cfg, const RunnerOptions& opt) {
    using namespace runner_detail;
    auto grid = load_grid(cfg);
    auto pots = load_potentials(cfg, grid.d);
    const int checks = cfg.unique_section("checks");
    auto out = load_output(cfg, opt);

    Report rep("check-potential", cfg, 0);
    rep.columns({"check", "quantity", "value", "verdict"});
    bool all_pass = true;
    auto verdict = [&](bool pass) {
        all_pass &= pass;
        return std::string(pass ? "pass" : "fail");
    };

    double tW = 0.0;
    for (const auto& p : pots) {
        if (p.role == PotentialRole::V_repulsive) {
            const double gamma = cfg.get_double(checks, "gamma");
            auto r = check_repulsive(p, grid.d, gamma, grid);
            rep.add_row({std::string("repulsive"), std::string("nonneg"), static_cast<long>(r.nonneg_ok),
                         verdict(r.nonneg_ok)});
            if (grid.d > 3) {
                rep.add_row({std::string("repulsive"), std::string("eta"), r.eta, verdict(r.pass)});
            } else {
                tW = r.tW_total();
                rep.add_row({std::string("repulsive"), std::string("tW_moment"), tW, verdict(r.pass)});
            }
        }
    }
    for (const auto& p : pots) {
        if (p.role == PotentialRole::n_attractive) {
            const double rho = cfg.get_double(checks, "rho");
            auto r = compute_beta_rho(p, rho, grid, tW);
            rep.add_row({std::string("attractive"), std::string("beta_rho"), r.beta, verdict(r.pass)});
            rep.add_row({std::string("attractive"), std::string("threshold"), r.threshold,
                         std::string(r.tail_known ? "tail_bounded" : "tail_unknown")});
        }
    }
    if (cfg.has(checks, "n1_bound")) {
        const double n1 = cfg.get_double(checks, "n1_bound");
        const int n2sec = cfg.unique_section("split_n2");
        auto n2 = load_potential(cfg, n2sec, grid.d);
        auto r = check_sobolev_split(n1, n2, grid.d, grid);
        rep.add_row({std::string("sobolev_split"), std::string("c1"), r.c1, verdict(r.pass)});
    }
    {
        PotentialSpec V1 = PotentialSpec::zero_potential(), V2 = PotentialSpec::zero_potential();
        bool has_lr = false;
        for (const auto& p : pots) {
            if (p.role == PotentialRole::V1_long_range) {
                V1 = p;
                has_lr = true;
            }
            if (p.role == PotentialRole::V2_long_range) {
                V2 = p;
                has_lr = true;
            }
        }
        if (has_lr) {
            const double gamma = cfg.get_double(checks, "gamma");
            std::vector<double> tau0s = cfg.has(checks, "tau0_list")
                                            ? cfg.get_list(checks, "tau0_list")
                                            : std::vector<double>{1.0};
            auto r = check_long_range(V1, V2, gamma, grid, grid.d, tau0s);
            rep.add_row({std::string("long_range"), std::string("a"), r.a,
                         verdict(std::isfinite(r.a))});
            for (auto& [t0, B] : r.B_values)
                rep.add_row({std::string("long_range"), "B(" + format_full(t0) + ")", B,
                             std::string("info")});
            if (grid.d == 2)
                rep.add_row({std::string("long_range"), std::string("d2_admissible"),
                             static_cast<long>(r.d2_admissible), verdict(r.d2_admissible)});
        }
    }
    cfg.require_all_consumed();
    rep.write(out.dir, "check_potential", out.format);
    return all_pass ? 0 : 2;
}

inline int run_multiplier(const Config& cfg, const RunnerOptions& opt) {
    using namespace runner_detail;
    auto grid = load_grid(cfg);
    auto out = load_output(cfg, opt);
    const int sec = cfg.unique_section("multiplier");
    const std::string kind = cfg.get_string(sec, "kind");
    bool ok = true;

    Report rep("multiplier", cfg, 0);
    if (kind == "psi") {
        auto prof = load_multiplier(cfg, grid);
        auto br = psi_bracketing(prof);
        ok = br.below_invR && br.below_R_over_r2 && br.below_inv_r && br.above_half_indicator;
        rep.note("bracketing_ok", static_cast<long>(ok));
        // optional A2 scan over the radial interval family
        if (cfg.has(sec, "a2_R_list")) {
            auto Rs = cfg.get_list(sec, "a2_R_list");
            const long count = cfg.get_int(sec, "a2_intervals", 200);
            SplitMix64 rng(static_cast<std::uint64_t>(cfg.get_int(sec, "a2_seed", 91)));
            std::vector<std::pair<double, double>> intervals;
            for (long k = 0; k < count; ++k) {
                const double center = std::exp(rng.uniform(std::log(0.3), std::log(10.0)));
                intervals.emplace_back(center, center * rng.uniform(0.05, 0.45));
            }
            auto a2 = check_A2(Rs, intervals, grid.rmax());
            rep.columns({"R", "sup_product"});
            for (auto& [R, sup] : a2.sup_product_per_R) rep.add_row({R, sup});
            const double spread = a2.max_over_R / a2.min_over_R;
            rep.note("a2_spread", spread);
            ok = ok && spread <= 2.0;
        } else {
            rep.columns({"r", "psi", "inv_psi"});
            for (int i = 0; i < grid.n; ++i) rep.add_row({grid.r(i), prof.psi[i], prof.inv_psi[i]});
        }
        cfg.require_all_consumed();
        rep.write(out.dir, "multiplier", out.format);
        return ok ? 0 : 2;
    }

    auto prof = load_multiplier(cfg, grid);
    rep.columns({"r", "dphi", "d2phi", "lap_phi", "bilap_phi", "phi_R"});
    for (int i = 0; i < grid.n; ++i)
        rep.add_row({grid.r(i), prof.dPhi[i], prof.d2Phi[i], prof.lapPhi[i],
                     prof.has_smooth_bilaplacian ? prof.bilapPhi[i] : 0.0,
                     prof.phi_R.empty() ? 0.0 : prof.phi_R[i]});

    if (prof.kind == MultiplierKind::morawetz) {
        double worst = 0.0;
        const double c = grid.d * (grid.d + 2.0) / (8.0 * std::sqrt(2.0));
        for (int i = 0; i < grid.n; ++i) {
            ok &= prof.dPhi[i] >= 1.0 - 1e-12 && prof.dPhi[i] <= 2.0 + 1e-12;
            const double rpp = grid.r(i) * prof.d2Phi[i] * prof.R;  // r Phi''(r/R) scale
            ok &= rpp >= -1e-12;
            if (grid.d > 3) {
                const double rhs = (grid.r(i) <= prof.R ? c / (prof.R * prof.R * prof.R) : 0.0) +
                                   (grid.d - 1.0) * (grid.d - 3.0) / std::pow(grid.r(i), 3.0);
                worst = std::max(worst, rhs + prof.bilapPhi[i]);
            }
        }
        ok &= worst <= 1e-10;
        rep.note("bounds_ok", static_cast<long>(ok));
    } else if (prof.kind == MultiplierKind::appendix2) {
        rep.note("moment_th", prof.moment_th);
        rep.note("measured_C", prof.measured_C);
        rep.note("bilap_residual", bilaplacian_residual(prof, prof.bilapPhi));
        ok &= prof.measured_C > 0.0;
    } else if (prof.kind == MultiplierKind::piecewise) {
        rep.note("snap_distance", prof.snap_distance);
        for (double v : prof.dPhi) ok &= std::abs(v) <= 1.0 + 1e-12;
        rep.note("grad_bound_ok", static_cast<long>(ok));
    }
    cfg.require_all_consumed();
    rep.write(out.dir, "multiplier", out.format);
    return ok ? 0 : 2;
}

inline int run_solve(const Config& cfg, const RunnerOptions& opt) {
    using namespace runner_detail;
    auto grid = load_grid(cfg);
    auto pb = load_problem(cfg, grid, load_potentials(cfg, grid.d));
    auto out = load_output(cfg, opt);
    double leak_max = 1e-3;
    if (const int tol = cfg.optional_section("tolerances"); tol >= 0)
        leak_max = cfg.get_double(tol, "leak_max", 1e-3);
    cfg.require_all_consumed();

    auto sol = solve_resolvent(pb);
    Report rep("solve", cfg, 0);
    rep.note("residual", sol.residual);
    rep.note("boundary_leak", sol.boundary_leak);
    if (sol.boundary_leak > leak_max)
        rep.note("warning", std::string("boundary leak above tolerance; consider larger rmax"));
    rep.columns({"r", "u_re", "u_im", "du_re", "du_im"});
    for (int i = 0; i < grid.n; ++i)
        rep.add_row({grid.r(i), sol.u.values[i].real(), sol.u.values[i].imag(),
                     sol.u.deriv[i].real(), sol.u.deriv[i].imag()});
    rep.write(out.dir, "solution", out.format);
    return 0;
}

inline int run_verify_identities(const Config& cfg, const RunnerOptions& opt) {
    using namespace runner_detail;
    auto out = load_output(cfg, opt);
    const int ids_sec = cfg.unique_section("identities");
    const long refinements = cfg.get_int(ids_sec, "refinements", 3);
    const std::string which = cfg.get_string(ids_sec, "ids", "all");
    const int msec = cfg.unique_section("multiplier");
    const double R = cfg.get_double(msec, "R");
    // A1-3/A1-13 take the smooth Morawetz profile, A1-4/A1-14 the piecewise
    // family with its matching varphi_R; the pairing is structural
    const std::string mkind = cfg.get_string(msec, "kind", "auto");
    if (mkind != "auto" && mkind != "morawetz" && mkind != "piecewise")
        throw ConfigError("identities runs pair profiles per identity; multiplier.kind must be auto");

    std::vector<IdentityId> ids;
    if (which == "all") {
        ids = {IdentityId::A1_1, IdentityId::A1_2, IdentityId::A1_3,
               IdentityId::A1_4, IdentityId::A1_13, IdentityId::A1_14};
    } else {
        std::istringstream ss(which);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            bool found = false;
            for (auto id : {IdentityId::A1_1, IdentityId::A1_2, IdentityId::A1_3, IdentityId::A1_4,
                            IdentityId::A1_13, IdentityId::A1_14})
                if (identity_name(id) == tok) {
                    ids.push_back(id);
                    found = true;
                }
            if (!found) throw ConfigError("identities.ids: unknown identity " + tok);
        }
    }
    double min_ratio = 0.0;
    if (const int tol = cfg.optional_section("tolerances"); tol >= 0)
        min_ratio = cfg.get_double(tol, "min_refinement_ratio", 0.0);

    const long base_n = cfg.get_int(cfg.unique_section("grid"), "n");

    Report rep("verify-identities", cfg, 0);
    rep.columns({"identity", "h", "lhs", "rhs", "residual", "order-estimate"});
    bool ok = true;
    for (auto id : ids) {
        double prev = -1.0;
        for (long level = 0; level < refinements; ++level) {
            auto grid = load_grid(cfg, base_n << level);
            auto pb = load_problem(cfg, grid, load_potentials(cfg, grid.d));
            auto sol = solve_resolvent(pb);
            IdentityReport ir;
            if (id == IdentityId::A1_1 || id == IdentityId::A1_2) {
                ir = check_identity(id, sol, pb, weight_phi_one());
            } else if (id == IdentityId::A1_4 || id == IdentityId::A1_14) {
                auto pw = piecewise_profile(R, grid);
                ir = check_identity(id, sol, pb, weight_phi_varphi(pw.R), &pw);
            } else {
                auto morz = morawetz_profile(R, grid);
                ir = check_identity(id, sol, pb, weight_phi_one(), &morz);
            }
            const double order = prev > 0.0 ? std::log2(prev / ir.residual) : 0.0;
            rep.add_row({std::string(identity_name(id)), grid.h, ir.lhs, ir.rhs, ir.residual, order});
            if (prev > 0.0 && min_ratio > 0.0 && prev / ir.residual < min_ratio) ok = false;
            prev = ir.residual;
        }
    }
    cfg.require_all_consumed();
    rep.write(out.dir, "identities", out.format);
    return ok ? 0 : 2;
}

inline int run_sweep(const Config& cfg, const RunnerOptions& opt) {
    using namespace runner_detail;
    auto grid = load_grid(cfg);
    auto out = load_output(cfg, opt);
    const int ss = cfg.unique_section("sweep");
    const int ds = cfg.unique_section("data");

    SweepSpec spec;
    spec.grid = grid;
    spec.potentials = load_potentials(cfg, grid.d);
    spec.estimate = estimate_from_name(cfg.get_string(ss, "estimate"));
    spec.threads = static_cast<int>(opt.threads);
    const std::string sign = cfg.get_string(ss, "sign", "plus");
    spec.sign = sign == "minus" ? ResolventSign::minus : ResolventSign::plus;
    const std::string tau_term = cfg.get_string(ss, "tau_term", "minus_tau");
    spec.tau_sign = tau_term == "plus_tau" ? TauSign::plus : TauSign::minus;
    const std::string boundary = cfg.get_string(ss, "boundary", "sponge");
    spec.boundary = boundary == "dirichlet" ? BoundaryKind::dirichlet : BoundaryKind::sponge;
    spec.sponge.width_fraction = cfg.get_double(ss, "sponge.width", 0.25);
    spec.sponge.strength = cfg.get_double(ss, "sponge.strength", 1.5);
    spec.rho = cfg.get_double(ss, "rho", 0.0);
    spec.tau0 = cfg.get_double(ss, "tau0", 0.0);
    spec.alpha = cfg.get_double(ss, "alpha", 0.5);
    spec.data.kind = DataFamily::kind_from_name(cfg.get_string(ds, "family"));
    spec.data.seed = static_cast<std::uint64_t>(cfg.get_int(ds, "seed"));
    spec.data.count = static_cast<int>(cfg.get_int(ds, "count"));
    if (const int tol = cfg.optional_section("tolerances"); tol >= 0)
        spec.leak_max = cfg.get_double(tol, "leak_max", 1e-3);

    const bool kato = spec.estimate == SweepEstimate::juan10_kato ||
                      spec.estimate == SweepEstimate::juan14_kato;
    SweepReport rep;
    if (kato) {
        spec.R_list = cfg.get_list(ss, "R_list");
        spec.time_window = cfg.get_double(ss, "time_window", 0.0);
        spec.time_step = cfg.get_double(ss, "time_step", 0.0);
        cfg.require_all_consumed();
        rep = run_kato_sweep(spec);
    } else {
        spec.tau_list = cfg.get_list(ss, "tau_list");
        spec.epsilon_list = cfg.get_list(ss, "epsilon_list");
        if (grid.d == 3 && cfg.has(ss, "gamma")) {
            // d = 3 repulsive envelope for the W-weighted term
            const double gamma = cfg.get_double(ss, "gamma");
            for (const auto& p : spec.potentials)
                if (p.role == PotentialRole::V_repulsive)
                    spec.W = check_repulsive(p, 3, gamma, grid).W;
        }
        cfg.require_all_consumed();
        rep = run_supersmooth_sweep(spec);
    }

    Report points("sweep", cfg, spec.data.seed);
    points.columns({"tau", "epsilon", "R", "estimate", "lhs_term", "ratio", "leak"});
    for (const auto& r : rep.rows)
        points.add_row({r.tau, r.epsilon, r.R, rep.estimate, r.lhs_term, r.ratio, r.leak});
    points.note("solved_points", static_cast<long>(rep.solved_points));
    points.note("filtered_points", static_cast<long>(rep.filtered_points));
    points.write(out.dir, "sweep", out.format);

    Report aggs("sweep-aggregates", cfg, spec.data.seed);
    aggs.columns({"estimate", "lhs_term", "sup_ratio", "decade_max", "decade_min", "decade_spread",
                  "trend_slope"});
    for (const auto& a : rep.aggregates)
        aggs.add_row({rep.estimate, a.lhs_term, a.sup_ratio, a.decade_max, a.decade_min,
                      a.decade_min > 0.0 ? a.decade_max / a.decade_min : 0.0, a.trend_slope});
    aggs.write(out.dir, "sweep_aggregates", out.format);
    return 0;
}

inline int run_evolve(const Config& cfg, const RunnerOptions& opt) {
    using namespace runner_detail;
    auto grid = load_grid(cfg);
    auto out = load_output(cfg, opt);
    const int es = cfg.unique_section("evolve");
    const int ds = cfg.unique_section("data");

    SweepSpec spec;
    spec.grid = grid;
    spec.potentials = load_potentials(cfg, grid.d);
    const std::string weight = cfg.get_string(es, "weight", "ball");
    spec.estimate = weight == "V_half_ball" ? SweepEstimate::juan14_kato : SweepEstimate::juan10_kato;
    spec.R_list = cfg.get_list(es, "R_list");
    spec.time_window = cfg.get_double(es, "T", 0.0);
    spec.time_step = cfg.get_double(es, "dt", 0.0);
    spec.data.kind = DataFamily::kind_from_name(cfg.get_string(ds, "family"));
    spec.data.seed = static_cast<std::uint64_t>(cfg.get_int(ds, "seed"));
    spec.data.count = static_cast<int>(cfg.get_int(ds, "count"));
    cfg.require_all_consumed();

    auto rep = run_kato_sweep(spec);
    Report points("evolve", cfg, spec.data.seed);
    points.columns({"R", "data_index", "lhs_term", "ratio"});
    for (const auto& r : rep.rows)
        points.add_row({r.R, static_cast<long>(r.data_index), r.lhs_term, r.ratio});
    points.note("ratio_max", rep.aggregates.front().decade_max);
    points.note("ratio_min", rep.aggregates.front().decade_min);
    points.write(out.dir, "evolve", out.format);
    return 0;
}

inline int run_spectrum(const Config& cfg, const RunnerOptions& opt) {
    using namespace runner_detail;
    auto grid = load_grid(cfg);
    auto out = load_output(cfg, opt);
    ResolventProblem pb;
    pb.grid = grid;
    pb.potentials = load_potentials(cfg, grid.d);
    pb.rhs = ModeFunction(grid);
    if (const int ps = cfg.optional_section("problem"); ps >= 0) {
        const std::string boundary = cfg.get_string(ps, "boundary", "dirichlet");
        if (boundary == "sponge") {
            pb.boundary = BoundaryKind::sponge;
            pb.sponge.width_fraction = cfg.get_double(ps, "sponge.width", 0.25);
            pb.sponge.strength = cfg.get_double(ps, "sponge.strength", 1.5);
        }
    }
    cfg.require_all_consumed();

    auto spec = diagonalize(pb);
    Report rep("spectrum", cfg, 0);
    rep.columns({"k", "lambda_re", "lambda_im"});
    if (spec.complex_cap) {
        for (int k = 0; k < spec.interior(); ++k)
            rep.add_row({static_cast<long>(k), spec.values_c[k].real(), spec.values_c[k].imag()});
    } else {
        for (int k = 0; k < spec.interior(); ++k)
            rep.add_row({static_cast<long>(k), spec.values[k], 0.0});
        double nearest = 1e300;
        for (double l : spec.values) nearest = std::min(nearest, std::abs(l));
        rep.note("min_abs_eigenvalue", nearest);
    }
    rep.write(out.dir, "spectrum", out.format);
    return 0;
}

/// dispatch; exit codes: 0 success, 1 usage/config error, 2 assertion failure
inline int run_subcommand(const std::string& cmd, const RunnerOptions& opt) {
    Config cfg = Config::parse_file(opt.config_path);
    if (opt.seed_override) cfg.override_key("data", "seed", std::to_string(*opt.seed_override));
    if (cmd == "check-potential") return run_check_potential(cfg, opt);
    if (cmd == "multiplier") return run_multiplier(cfg, opt);
    if (cmd == "solve") return run_solve(cfg, opt);
    if (cmd == "verify-identities") return run_verify_identities(cfg, opt);
    if (cmd == "sweep") return run_sweep(cfg, opt);
    if (cmd == "evolve") return run_evolve(cfg, opt);
    if (cmd == "spectrum") return run_spectrum(cfg, opt);
    throw ConfigError("unknown subcommand: " + cmd);
}

}  // namespace helmlab
