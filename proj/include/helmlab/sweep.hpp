#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "helmlab/grid.hpp"
#include "helmlab/helmholtz.hpp"
#include "helmlab/numeric.hpp"
#include "helmlab/potentials.hpp"
#include "helmlab/spectral.hpp"

namespace helmlab {

enum class SweepEstimate { basic, basic_attractive, mayo10, weighted_sinpeque, juan10_kato, juan14_kato };

inline std::string estimate_name(SweepEstimate e) {
    switch (e) {
        case SweepEstimate::basic: return "basic";
        case SweepEstimate::basic_attractive: return "basic_attractive";
        case SweepEstimate::mayo10: return "mayo10";
        case SweepEstimate::weighted_sinpeque: return "weighted_sinpeque";
        case SweepEstimate::juan10_kato: return "juan10_kato";
        case SweepEstimate::juan14_kato: return "juan14_kato";
    }
    return "?";
}

inline SweepEstimate estimate_from_name(const std::string& s) {
    for (auto e : {SweepEstimate::basic, SweepEstimate::basic_attractive, SweepEstimate::mayo10,
                   SweepEstimate::weighted_sinpeque, SweepEstimate::juan10_kato, SweepEstimate::juan14_kato})
        if (estimate_name(e) == s) return e;
    throw std::invalid_argument("unknown sweep estimate: " + s);
}

// ---------------------------------------------------------------------------
// Seeded data families; chosen to stress the dyadic shell structure of the
// X* norm.

struct DataFamily {
    enum class Kind { gaussian, gaussian_near, shell, shell_bump, mixed };
    Kind kind = Kind::gaussian;
    std::uint64_t seed = 1;
    int count = 10;

    static Kind kind_from_name(const std::string& s) {
        if (s == "gaussian") return Kind::gaussian;
        if (s == "gaussian_near") return Kind::gaussian_near;
        if (s == "shell") return Kind::shell;
        if (s == "shell_bump") return Kind::shell_bump;
        if (s == "mixed") return Kind::mixed;
        throw std::invalid_argument("unknown data family: " + s);
    }
};

inline ModeFunction make_family_data(const RadialGrid& g, const DataFamily& fam, int index) {
    SplitMix64 rng(fam.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1));
    ModeFunction f(g);
    auto kind = fam.kind;
    int shell_pick = index;
    if (kind == DataFamily::Kind::mixed) {
        const DataFamily::Kind cycle[3] = {DataFamily::Kind::gaussian, DataFamily::Kind::shell_bump,
                                           DataFamily::Kind::shell};
        kind = cycle[index % 3];
        shell_pick = index / 3;
    }
    // shells clear of the sponge region; the dyadic scales are cycled
    // deterministically so every decade of the lattice sees concentrated
    // data at every scale regardless of the seed
    const int jmax = std::max(0, static_cast<int>(std::floor(std::log2(0.45 * g.rmax()))) - 1);
    const int j = shell_pick % (jmax + 1);
    switch (kind) {
        case DataFamily::Kind::mixed:
        case DataFamily::Kind::gaussian: {
            const double center = rng.uniform(0.08, 0.40) * g.rmax();
            const double width = rng.uniform(0.4, 1.6);
            f = ModeFunction::from_real_profile(g, [=](double r) {
                return std::exp(-sqr((r - center) / width));
            });
            break;
        }
        case DataFamily::Kind::gaussian_near: {
            // bumps that illuminate unit-scale balls within short windows
            const double center = rng.uniform(1.5, 3.5);
            const double width = rng.uniform(0.8, 1.4);
            f = ModeFunction::from_real_profile(g, [=](double r) {
                return std::exp(-sqr((r - center) / width));
            });
            break;
        }
        case DataFamily::Kind::shell: {
            f = ModeFunction::shell_indicator(g, std::ldexp(1.0, j), std::ldexp(1.0, j + 1));
            break;
        }
        case DataFamily::Kind::shell_bump: {
            const double c = 1.5 * std::ldexp(1.0, j), w = 0.3 * std::ldexp(1.0, j);
            f = ModeFunction::from_real_profile(g, [=](double r) {
                return std::exp(-sqr((r - c) / w));
            });
            break;
        }
    }
    f.values[g.n - 1] = complexd{0.0, 0.0};
    return f;
}

// ---------------------------------------------------------------------------

struct SweepSpec {
    RadialGrid grid;
    std::vector<PotentialSpec> potentials;
    SweepEstimate estimate = SweepEstimate::basic;
    ResolventSign sign = ResolventSign::plus;
    TauSign tau_sign = TauSign::minus;
    BoundaryKind boundary = BoundaryKind::sponge;
    SpongeParams sponge{0.25, 1.5};
    std::vector<double> tau_list;
    std::vector<double> epsilon_list;
    std::vector<double> R_list;  // kato sweeps
    double rho = 0.0;            // X_rho scale (basic_attractive); mayo10 uses tau0
    double tau0 = 0.0;
    double alpha = 0.5;          // weighted norms
    double leak_max = 1e-3;
    DataFamily data;
    std::vector<double> W;  // d = 3 repulsive envelope samples (may be empty)
    int threads = 1;
    // kato settings
    double time_window = 0.0;  // 0: use the traversal guard
    double time_step = 0.0;    // 0: fastest-phase bound
};

struct SweepRow {
    double tau = 0.0, epsilon = 0.0, R = 0.0;
    int data_index = 0;
    std::string lhs_term;
    double ratio = 0.0;
    double leak = 0.0;
    bool filtered = false;
};

struct TermAggregate {
    std::string lhs_term;
    double sup_ratio = 0.0;
    double decade_max = 0.0;
    double decade_min = 0.0;
    double trend_slope = 0.0;  // d(sup ratio) / d(ln eps), least squares
};

struct SweepReport {
    std::string estimate;
    std::uint64_t seed = 0;
    std::vector<SweepRow> rows;
    std::vector<TermAggregate> aggregates;
    int solved_points = 0;
    int filtered_points = 0;
};

namespace detail {

inline double norm_X_sq_of_density(const RadialGrid& g, const std::vector<double>& density, double rho) {
    auto prefix = ball_prefix(g, density);
    double best = 0.0;
    for (double R : dyadic_radii(g, rho)) best = std::max(best, ball_eval(g, density, prefix, R) / R);
    return best;
}

inline std::vector<double> scaled_density(const RadialGrid& g, const std::vector<double>& base,
                                          const std::function<double(double)>& w) {
    std::vector<double> out(g.n);
    for (int i = 0; i < g.n; ++i) out[i] = base[i] * w(g.r(i));
    return out;
}

/// per-term left-hand functionals of the selected estimate, as (name, value)
inline std::vector<std::pair<std::string, double>> estimate_lhs(const SweepSpec& spec,
                                                                const ResolventProblem& pb,
                                                                const ResolventSolution& sol) {
    const RadialGrid& g = pb.grid;
    auto absu = abs2(sol.u.values);
    auto grad = grad_density(sol.u);
    std::vector<std::pair<std::string, double>> terms;

    auto V_of = [&](PotentialRole role) {
        std::vector<double> v(g.n, 0.0);
        for (const auto& p : spec.potentials)
            if (p.role == role)
                for (int i = 0; i < g.n; ++i) v[i] += p.eval(g.r(i));
        return v;
    };

    switch (spec.estimate) {
        case SweepEstimate::basic: {
            auto V = V_of(PotentialRole::V_repulsive);
            terms.emplace_back("grad_X", norm_X_sq_of_density(g, grad, 0.0));
            terms.emplace_back("tau_X", std::max(0.0, pb.tau) * norm_X_sq_of_density(g, absu, 0.0));
            terms.emplace_back("cube", (g.d - 3.0) *
                                           radial_integral_real(g, scaled_density(g, absu, [](double r) {
                                               return 1.0 / (r * r * r);
                                           })));
            {
                std::vector<double> dens(g.n);
                for (int i = 0; i < g.n; ++i) dens[i] = V[i] / g.r(i) * absu[i];
                terms.emplace_back("V_over_r", radial_integral_real(g, dens));
            }
            terms.emplace_back("R3", sup_ball_power(sol.u, 3.0, 0.0));
            if (g.d == 3 && !spec.W.empty()) {
                std::vector<double> dens(g.n);
                for (int i = 0; i < g.n; ++i) dens[i] = spec.W[i] / g.r(i) * absu[i];
                terms.emplace_back("W_over_r", radial_integral_real(g, dens));
            }
            break;
        }
        case SweepEstimate::basic_attractive: {
            const double rho = spec.rho;
            auto V = V_of(PotentialRole::V_repulsive);
            auto n_att = V_of(PotentialRole::n_attractive);
            terms.emplace_back("grad_Xrho", norm_X_sq_of_density(g, grad, rho));
            terms.emplace_back("surface", sup_surface(sol.u, rho));
            {
                std::vector<double> dens(g.n);
                for (int i = 0; i < g.n; ++i) dens[i] = std::abs(n_att[i]) * absu[i];
                terms.emplace_back("n_half_Xrho", norm_X_sq_of_density(g, dens, rho));
            }
            terms.emplace_back("cube", (g.d - 3.0) *
                                           radial_integral_real(g, scaled_density(g, absu, [](double r) {
                                               return 1.0 / (r * r * r);
                                           })));
            terms.emplace_back("tau_Xrho", pb.tau * norm_X_sq_of_density(g, absu, rho));
            {
                std::vector<double> dens(g.n);
                for (int i = 0; i < g.n; ++i) dens[i] = V[i] / g.r(i) * absu[i];
                terms.emplace_back("V_over_r", radial_integral_real(g, dens));
            }
            if (g.d == 3 && !spec.W.empty()) {
                std::vector<double> dens(g.n);
                for (int i = 0; i < g.n; ++i) dens[i] = spec.W[i] / g.r(i) * absu[i];
                terms.emplace_back("W_over_r", radial_integral_real(g, dens));
            }
            break;
        }
        case SweepEstimate::mayo10: {
            const double rho = spec.tau0;
            terms.emplace_back("grad_Xtau0", norm_X_sq_of_density(g, grad, rho));
            terms.emplace_back("tau_Xtau0", pb.tau * norm_X_sq_of_density(g, absu, rho));
            if (g.d >= 3) {  // the d = 2 variant carries no cube term
                std::vector<double> dens(g.n);
                for (int i = 0; i < g.n; ++i)
                    dens[i] = g.r(i) > rho ? (g.d - 3.0) * absu[i] / std::pow(g.r(i), 3.0) : 0.0;
                terms.emplace_back("cube_ext", radial_integral_real(g, dens));
            }
            terms.emplace_back("surface", sup_surface(sol.u, rho));
            break;
        }
        case SweepEstimate::weighted_sinpeque: {
            auto w = [a = spec.alpha](double r) { return std::pow(1.0 + r, -1.0 - a); };
            terms.emplace_back("grad_w", radial_integral_real(g, scaled_density(g, grad, w)));
            terms.emplace_back("tau_w", pb.tau * radial_integral_real(g, scaled_density(g, absu, w)));
            break;
        }
        default:
            throw std::invalid_argument("estimate_lhs: resolvent-side estimates only");
    }
    return terms;
}

inline double estimate_rhs(const SweepSpec& spec, const ModeFunction& f) {
    switch (spec.estimate) {
        case SweepEstimate::basic: return sqr(norm_Xstar(f, 0.0));
        case SweepEstimate::basic_attractive: return sqr(norm_Xstar(f, spec.rho));
        case SweepEstimate::mayo10: return sqr(norm_Xstar(f, spec.tau0));
        case SweepEstimate::weighted_sinpeque:
            return integrate_radial(f, weight_one_plus_r_power(spec.alpha, +1));
        default: throw std::invalid_argument("estimate_rhs: resolvent-side estimates only");
    }
}

inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Solve the lattice, evaluate the selected left-hand functionals over the
/// right-hand norm, filter leaked points, and aggregate per epsilon decade.
inline SweepReport run_supersmooth_sweep(const SweepSpec& spec) {
    if (spec.tau_list.empty() || spec.epsilon_list.empty())
        throw std::invalid_argument("run_supersmooth_sweep: empty lattice");
    if (spec.data.count < 1) throw std::invalid_argument("run_supersmooth_sweep: empty data family");

    SweepReport rep;
    rep.estimate = estimate_name(spec.estimate);
    rep.seed = spec.data.seed;

    struct Point {
        double tau, eps;
        int data_index;
    };
    std::vector<Point> lattice;
    for (double tau : spec.tau_list)
        for (double eps : spec.epsilon_list)
            for (int k = 0; k < spec.data.count; ++k) lattice.push_back({tau, eps, k});

    std::vector<ModeFunction> datas;
    std::vector<double> rhs_norms;
    for (int k = 0; k < spec.data.count; ++k) {
        datas.push_back(make_family_data(spec.grid, spec.data, k));
        rhs_norms.push_back(detail::estimate_rhs(spec, datas.back()));
    }

    std::vector<std::vector<SweepRow>> slots(lattice.size());
    detail::parallel_for(static_cast<int>(lattice.size()), spec.threads, [&](int idx) {
        const auto& pt = lattice[static_cast<std::size_t>(idx)];
        ResolventProblem pb;
        pb.grid = spec.grid;
        pb.potentials = spec.potentials;
        pb.sign = spec.sign;
        pb.tau_sign = spec.tau_sign;
        pb.boundary = spec.boundary;
        pb.sponge = spec.sponge;
        pb.tau = pt.tau;
        pb.epsilon = pt.eps;
        pb.rhs = datas[static_cast<std::size_t>(pt.data_index)];
        auto sol = solve_resolvent(pb);
        const bool filtered = sol.boundary_leak > spec.leak_max;
        const double rhs = rhs_norms[static_cast<std::size_t>(pt.data_index)];
        auto terms = detail::estimate_lhs(spec, pb, sol);
        auto& out = slots[static_cast<std::size_t>(idx)];
        for (auto& [name, value] : terms) {
            SweepRow row;
            row.tau = pt.tau;
            row.epsilon = pt.eps;
            row.R = 0.0;
            row.data_index = pt.data_index;
            row.lhs_term = name;
            row.ratio = rhs > 0.0 ? value / rhs : 0.0;
            row.leak = sol.boundary_leak;
            row.filtered = filtered;
            out.push_back(std::move(row));
        }
    });
    for (auto& s : slots)
        for (auto& r : s) rep.rows.push_back(std::move(r));
    rep.solved_points = static_cast<int>(lattice.size());
    for (const auto& r : rep.rows)
        if (r.filtered) ++rep.filtered_points;

    // aggregate: per term, sup ratio per epsilon over unfiltered points
    std::map<std::string, std::map<double, double>> per_eps;
    int usable = 0;
    for (const auto& r : rep.rows) {
        if (r.filtered) continue;
        ++usable;
        auto& m = per_eps[r.lhs_term][r.epsilon];
        m = std::max(m, r.ratio);
    }
    if (usable == 0) {
        // leak histogram in the error message
        std::map<int, int> hist;
        for (const auto& r : rep.rows) hist[static_cast<int>(std::floor(std::log10(r.leak + 1e-300)))]++;
        std::string msg = "run_supersmooth_sweep: all lattice points contaminated; leak histogram:";
        for (auto& [decade, count] : hist)
            msg += " 1e" + std::to_string(decade) + ":" + std::to_string(count);
        throw std::runtime_error(msg);
    }

    for (auto& [term, sups] : per_eps) {
        TermAggregate agg;
        agg.lhs_term = term;
        std::map<int, double> decades;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int nobs = 0;
        for (auto& [eps, sup] : sups) {
            agg.sup_ratio = std::max(agg.sup_ratio, sup);
            const int dec = static_cast<int>(std::floor(std::log10(eps) + 1e-12));
            decades[dec] = std::max(decades[dec], sup);
            const double x = std::log(eps), y = sup;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++nobs;
        }
        agg.decade_max = 0.0;
        agg.decade_min = std::numeric_limits<double>::infinity();
        for (auto& [_, v] : decades) {
            agg.decade_max = std::max(agg.decade_max, v);
            agg.decade_min = std::min(agg.decade_min, v);
        }
        if (agg.sup_ratio == 0.0) agg.decade_min = 0.0;  // identically zero term
        agg.trend_slope =
            nobs >= 2 ? (nobs * sxy - sx * sy) / std::max(1e-300, nobs * sxx - sx * sx) : 0.0;
        rep.aggregates.push_back(std::move(agg));
    }
    return rep;
}

/// Time-domain Kato sweeps: the windowed smoothing functional over R_list
/// and the data family, normalized by the datum's L2 mass.
inline SweepReport run_kato_sweep(const SweepSpec& spec) {
    if (spec.R_list.empty()) throw std::invalid_argument("run_kato_sweep: empty R list");
    SweepReport rep;
    rep.estimate = estimate_name(spec.estimate);
    rep.seed = spec.data.seed;

    ResolventProblem pb;
    pb.grid = spec.grid;
    pb.potentials = spec.potentials;
    pb.rhs = ModeFunction(spec.grid);
    auto spectrum = diagonalize(pb);

    ResolventProblem free_pb;
    free_pb.grid = spec.grid;
    free_pb.rhs = ModeFunction(spec.grid);
    auto free_spec = spec.potentials.empty() ? spectrum : diagonalize(free_pb);

    const double lam_max = spectrum.max_abs_value();
    const double Tguard = spec.grid.rmax() / (4.0 * std::sqrt(lam_max));
    const double T = spec.time_window > 0.0 ? spec.time_window : 0.95 * Tguard;

    std::vector<double> Vhalf(spec.grid.n, 0.0);
    if (spec.estimate == SweepEstimate::juan14_kato) {
        for (int i = 0; i < spec.grid.n; ++i) {
            double v = 0.0;
            for (const auto& p : spec.potentials) v += p.eval(spec.grid.r(i));
            Vhalf[i] = std::sqrt(std::max(0.0, v));
        }
    }

    for (int k = 0; k < spec.data.count; ++k) {
        auto u0 = make_family_data(spec.grid, spec.data, k);
        const double mass = spec.grid.omega * liouville_norm_sq(u0);
        for (double R : spec.R_list) {
            SmoothingConfig cfg;
            cfg.T = T;
            cfg.dt = spec.time_step;
            cfg.half_deriv = spec.estimate == SweepEstimate::juan10_kato;
            cfg.free_spectrum = &free_spec;
            if (spec.estimate == SweepEstimate::juan10_kato) {
                cfg.weight.name = "ball/R";
                cfg.weight.w = [R](double r) { return r <= R ? 1.0 / R : 0.0; };
            } else {
                cfg.weight.name = "V12_ball/R";
                const auto& g = spec.grid;
                auto Vh = Vhalf;
                const double h = g.h;
                const int n = g.n;
                cfg.weight.w = [R, Vh = std::move(Vh), h, n](double r) {
                    if (r > R) return 0.0;
                    int i = std::clamp(static_cast<int>(std::lround(r / h)) - 1, 0, n - 1);
                    return Vh[static_cast<std::size_t>(i)] / R;
                };
            }
            SweepRow row;
            row.R = R;
            row.data_index = k;
            row.lhs_term = spec.estimate == SweepEstimate::juan10_kato ? "kato_halfderiv" : "kato_V12";
            row.ratio = smoothing_functional(spectrum, u0, cfg) / mass;
            rep.rows.push_back(std::move(row));
        }
    }

    TermAggregate agg;
    agg.lhs_term = rep.rows.front().lhs_term;
    agg.decade_min = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) {
        agg.sup_ratio = std::max(agg.sup_ratio, r.ratio);
        agg.decade_max = std::max(agg.decade_max, r.ratio);
        agg.decade_min = std::min(agg.decade_min, r.ratio);
    }
    rep.aggregates.push_back(std::move(agg));
    return rep;
}

}  // namespace helmlab
