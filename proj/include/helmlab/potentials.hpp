#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "helmlab/grid.hpp"
#include "helmlab/numeric.hpp"

namespace helmlab {

enum class PotentialKind { zero, inverse_power, smooth_inverse_power, exp_well, neumann_table, manufactured };
enum class PotentialRole { V_repulsive, n_attractive, V1_long_range, V2_long_range };

/// Parametric radial potential. `scale` is an exact multiplicative factor so
/// that n -> mu*n scaling studies do not re-derive profiles.
///
/// exp_well evaluates w(r) = mu*(exp(g(r)-g(inf)) - 1) + shift with
/// g'(r) = b/(1+r)^{gamma_g}, gamma_g > 1; shift = -mu gives the attractive
/// well n = w - mu used with the beta_rho condition.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::zero;
    PotentialRole role = PotentialRole::V_repulsive;
    double scale = 1.0;

    double c = 0.0;
    double gamma_pow = 0.0;  // inverse_power: c / r^gamma_pow
    double alpha_pow = 0.0;  // smooth_inverse_power: c / (1+r^2)^{alpha/2}

    double mu = 0.0, b = 0.0, gamma_g = 0.0, shift = 0.0;  // exp_well

    std::vector<double> table_r, table_v;  // neumann_table

    std::function<double(double)> profile, dprofile;  // manufactured
    double declared_decay = std::numeric_limits<double>::infinity();

    // optional (n1 bound, n2 profile) split for the Sobolev condition
    double split_n1_bound = 0.0;
    std::shared_ptr<const PotentialSpec> split_n2;

    static PotentialSpec zero_potential() { return {}; }

    static PotentialSpec inverse_power(double c, double gamma_pow,
                                       PotentialRole role = PotentialRole::V_repulsive) {
        if (gamma_pow <= 0.0) throw std::invalid_argument("inverse_power: gamma_pow > 0 required");
        PotentialSpec s;
        s.kind = PotentialKind::inverse_power;
        s.role = role;
        s.c = c;
        s.gamma_pow = gamma_pow;
        return s;
    }

    static PotentialSpec smooth_inverse_power(double c, double alpha_pow,
                                              PotentialRole role = PotentialRole::V_repulsive) {
        PotentialSpec s;
        s.kind = PotentialKind::smooth_inverse_power;
        s.role = role;
        s.c = c;
        s.alpha_pow = alpha_pow;
        return s;
    }

    static PotentialSpec exp_well(double mu, double b, double gamma_g, double shift = 0.0,
                                  PotentialRole role = PotentialRole::n_attractive) {
        if (gamma_g <= 1.0) throw std::invalid_argument("exp_well: gamma_g > 1 required");
        if (mu <= 0.0) throw std::invalid_argument("exp_well: mu > 0 required");
        PotentialSpec s;
        s.kind = PotentialKind::exp_well;
        s.role = role;
        s.mu = mu;
        s.b = b;
        s.gamma_g = gamma_g;
        s.shift = shift;
        return s;
    }

    static PotentialSpec neumann_table(std::vector<double> rs, std::vector<double> vs,
                                       PotentialRole role = PotentialRole::V_repulsive) {
        if (rs.size() != vs.size() || rs.size() < 2)
            throw std::invalid_argument("neumann_table: matching r/v samples required");
        PotentialSpec s;
        s.kind = PotentialKind::neumann_table;
        s.role = role;
        s.table_r = std::move(rs);
        s.table_v = std::move(vs);
        return s;
    }

    static PotentialSpec manufactured(std::function<double(double)> f, std::function<double(double)> df,
                                      PotentialRole role = PotentialRole::V_repulsive,
                                      double decay = std::numeric_limits<double>::infinity()) {
        PotentialSpec s;
        s.kind = PotentialKind::manufactured;
        s.role = role;
        s.profile = std::move(f);
        s.dprofile = std::move(df);
        s.declared_decay = decay;
        return s;
    }

    PotentialSpec scaled(double factor) const {
        PotentialSpec s = *this;
        s.scale *= factor;
        return s;
    }

    bool has_exact_derivative() const { return kind != PotentialKind::neumann_table; }

    /// g(inf) - g(r) for the exp_well generator
    double well_G(double r) const { return b * std::pow(1.0 + r, 1.0 - gamma_g) / (gamma_g - 1.0); }

    double eval(double r) const {
        if (r <= 0.0) throw std::domain_error("eval_potential: r > 0 required");
        double v = 0.0;
        switch (kind) {
            case PotentialKind::zero: v = 0.0; break;
            case PotentialKind::inverse_power: v = c * std::pow(r, -gamma_pow); break;
            case PotentialKind::smooth_inverse_power:
                v = c * std::pow(1.0 + r * r, -0.5 * alpha_pow);
                break;
            case PotentialKind::exp_well: v = mu * (std::exp(-well_G(r)) - 1.0) + shift; break;
            case PotentialKind::neumann_table: v = table_interp(r); break;
            case PotentialKind::manufactured: v = profile(r); break;
        }
        v *= scale;
        if (!std::isfinite(v)) throw std::runtime_error("eval_potential: non-finite profile value");
        return v;
    }

    double eval_deriv(double r) const {
        if (r <= 0.0) throw std::domain_error("eval_potential: r > 0 required");
        double dv = 0.0;
        switch (kind) {
            case PotentialKind::zero: dv = 0.0; break;
            case PotentialKind::inverse_power: dv = -gamma_pow * c * std::pow(r, -gamma_pow - 1.0); break;
            case PotentialKind::smooth_inverse_power:
                dv = -alpha_pow * c * r * std::pow(1.0 + r * r, -0.5 * alpha_pow - 1.0);
                break;
            case PotentialKind::exp_well:
                dv = mu * (b * std::pow(1.0 + r, -gamma_g)) * std::exp(-well_G(r));
                break;
            case PotentialKind::neumann_table:
                throw std::runtime_error("eval_deriv: table kind has no exact derivative");
            case PotentialKind::manufactured: dv = dprofile(r); break;
        }
        dv *= scale;
        if (!std::isfinite(dv)) throw std::runtime_error("eval_potential: non-finite derivative value");
        return dv;
    }

    std::vector<double> sample(const RadialGrid& g) const {
        std::vector<double> out(g.n);
        for (int i = 0; i < g.n; ++i) out[i] = eval(g.r(i));
        return out;
    }

    /// exact radial derivative where available, 4th-order differences otherwise
    std::vector<double> sample_deriv(const RadialGrid& g) const {
        std::vector<double> out(g.n);
        if (has_exact_derivative()) {
            for (int i = 0; i < g.n; ++i) out[i] = eval_deriv(g.r(i));
            return out;
        }
        return derivative4(sample(g), g.h);
    }

    /// declared far-field decay exponent of the profile (toward its limit)
    double decay_exponent() const {
        switch (kind) {
            case PotentialKind::zero: return std::numeric_limits<double>::infinity();
            case PotentialKind::inverse_power: return gamma_pow;
            case PotentialKind::smooth_inverse_power: return alpha_pow;
            case PotentialKind::exp_well: return gamma_g - 1.0;
            case PotentialKind::neumann_table: return 0.0;
            case PotentialKind::manufactured: return declared_decay;
        }
        return 0.0;
    }

private:
    double table_interp(double r) const {
        if (r <= table_r.front()) return table_v.front();
        if (r >= table_r.back()) return table_v.back();
        auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
        const std::size_t j = static_cast<std::size_t>(it - table_r.begin());
        const double t = (r - table_r[j - 1]) / (table_r[j] - table_r[j - 1]);
        return table_v[j - 1] * (1.0 - t) + table_v[j] * t;
    }
};

inline double eval_potential(const PotentialSpec& spec, double r) { return spec.eval(r); }

/// V = (Delta u*)/u* for u*(r) = (1+r^2)^lambda, the decay-C/|x|^2 potential
/// with the explicit zero eigenfunction u* (lambda < -d/2 for L2 membership).
inline PotentialSpec zero_mode_counterexample(int d, double lambda) {
    const double c1 = 2.0 * lambda * (d + 2.0 * lambda - 2.0);
    const double c2 = -4.0 * lambda * (lambda - 1.0);
    return PotentialSpec::manufactured(
        [c1, c2](double r) {
            const double s = 1.0 + r * r;
            return c1 / s + c2 / (s * s);
        },
        [c1, c2](double r) {
            const double s = 1.0 + r * r;
            return -2.0 * r * c1 / (s * s) - 4.0 * r * c2 / (s * s * s);
        },
        PotentialRole::n_attractive, 2.0);
}

// ---------------------------------------------------------------------------
// Repulsivity (conditions i-ii)

struct RepulsivityReport {
    int d = 0;
    double gamma = 0.0;
    bool nonneg_ok = true;
    int first_negative_node = -1;
    int chi_d = 0;
    // d > 3 branch
    double eta = 0.0;  // largest admissible margin, capped at 1
    // d = 3 branch
    std::vector<double> W;
    double tW_moment = 0.0;   // grid quadrature of int t W(t) dt
    double tW_tail = 0.0;     // closed-form tail bound beyond rmax
    double tW_origin = 0.0;   // bound for the (0,h) cell
    bool pass = false;

    double tW_total() const { return tW_moment + tW_tail + tW_origin; }
};

/// gamma*V(r) + r*dV(r) against the dimensional threshold; reports the
/// largest admissible margin eta (d > 3) or the envelope W with its moment
/// (d = 3).
inline RepulsivityReport check_repulsive(const PotentialSpec& spec, int d, double gamma,
                                         const RadialGrid& grid) {
    if (d < 3) throw std::invalid_argument("check_repulsive: d >= 3 required");
    if (gamma <= 0.0) throw std::invalid_argument("check_repulsive: gamma > 0 required");
    RepulsivityReport rep;
    rep.d = d;
    rep.gamma = gamma;
    rep.chi_d = (d == 3) ? 1 : 0;

    auto V = spec.sample(grid);
    auto dV = spec.sample_deriv(grid);
    std::vector<double> lhs(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        if (V[i] < 0.0 && rep.nonneg_ok) {
            rep.nonneg_ok = false;
            rep.first_negative_node = i;
        }
        lhs[i] = gamma * V[i] + grid.r(i) * dV[i];
    }
    if (!rep.nonneg_ok) {
        rep.pass = false;
        return rep;
    }

    if (d > 3) {
        const double cd = 0.5 * (d - 1.0) * (d - 3.0);
        double S = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid.n; ++i) S = std::max(S, lhs[i] * sqr(grid.r(i)) / cd);
        rep.eta = 1.0 - std::max(S, 0.0);
        rep.pass = rep.eta > 0.0;
        return rep;
    }

    // d = 3: envelope and its t-moment. Values below the cancellation noise
    // of gamma V + r V' are genuine zeros of the envelope (homogeneous
    // profiles cancel exactly up to rounding).
    rep.W.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double noise = 1e-13 * (gamma * std::abs(V[i]) + grid.r(i) * std::abs(dV[i]));
        rep.W[i] = lhs[i] > noise ? lhs[i] : 0.0;
    }
    KahanSum m;
    for (int i = 0; i + 1 < grid.n; ++i)
        m.add(0.5 * grid.h * (grid.r(i) * rep.W[i] + grid.r(i + 1) * rep.W[i + 1]));
    rep.tW_moment = m.value();

    const double Wend = rep.W.back();
    const double p = spec.decay_exponent();  // W decays no slower than the profile does
    if (Wend > 1e-300) {
        if (p > 2.0)
            rep.tW_tail = Wend * sqr(grid.rmax()) / (p - 2.0);
        else
            rep.tW_tail = std::numeric_limits<double>::infinity();
    }
    const double Wfirst = rep.W.front();
    if (Wfirst > 1e-300) {
        // W ~ W(h) (r/h)^{-s} on (0,h) with s the declared singularity
        const double s = (spec.kind == PotentialKind::inverse_power) ? spec.gamma_pow : 0.0;
        rep.tW_origin = (s < 2.0) ? Wfirst * sqr(grid.h) / (2.0 - s)
                                  : std::numeric_limits<double>::infinity();
    }
    rep.pass = rep.tW_total() < 0.5;
    return rep;
}

// ---------------------------------------------------------------------------
// Sobolev split (condition iii), Hardy-sufficient criterion only

struct SobolevSplitResult {
    double kappa = 0.0;  // |n2| <= kappa / r^2
    double c1 = 0.0;     // kappa * (2/(d-2))^2
    bool pass = false;
};

/// Sufficient criterion: if |n2| <= kappa/r^2 then the Sobolev condition holds
/// with c1 = kappa*(2/(d-2))^2 by Hardy's inequality; pass iff c1 < 1.
inline SobolevSplitResult check_sobolev_split(double n1_bound, const PotentialSpec& n2, int d,
                                              const RadialGrid& grid) {
    if (d < 3) throw std::invalid_argument("check_sobolev_split: d >= 3 required");
    if (n1_bound < 0.0) throw std::invalid_argument("check_sobolev_split: n1 bound must be >= 0");
    SobolevSplitResult out;
    // domination by kappa/r^2 must hold off the grid as well
    switch (n2.kind) {
        case PotentialKind::zero: out.kappa = 0.0; break;
        case PotentialKind::inverse_power:
            if (n2.gamma_pow != 2.0)
                throw std::runtime_error("check_sobolev_split: profile not dominated by kappa/r^2");
            out.kappa = std::abs(n2.c * n2.scale);
            break;
        case PotentialKind::smooth_inverse_power:
            if (n2.alpha_pow < 2.0)
                throw std::runtime_error("check_sobolev_split: profile not dominated by kappa/r^2");
            [[fallthrough]];
        default: {
            double kappa = 0.0;
            int argmax = -1;
            for (int i = 0; i < grid.n; ++i) {
                const double v = std::abs(n2.eval(grid.r(i))) * sqr(grid.r(i));
                if (v > kappa) {
                    kappa = v;
                    argmax = i;
                }
            }
            // a supremum still climbing at the boundary is not a domination bound
            if (argmax >= grid.n - 2 && kappa > 0.0)
                throw std::runtime_error("check_sobolev_split: profile not dominated by kappa/r^2");
            out.kappa = kappa;
            break;
        }
    }
    out.c1 = out.kappa * sqr(2.0 / (d - 2.0));
    out.pass = out.c1 < 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Attraction smallness index beta_rho (condition iv)

struct AttractionReport {
    double rho = 0.0;
    int j0 = 0;
    std::vector<std::pair<int, double>> shell_sup;  // (j, clamped sup of dn/|n|-like ratio)
    double ball_sup = 0.0;
    double tail_bound = 0.0;
    bool tail_known = true;
    bool truncated = false;
    double beta = 0.0;
    double threshold = 0.0;
    bool pass = false;
    double hardy_c1 = 0.0;  // Hardy-sufficiency constant of the attached split, if any
};

/// beta_rho = sum_{j >= j0} 2^{j+1} sup_{C_j} dn/|n| + rho sup_{B(0,rho)} dn/|n|
/// with each supremum clamped below at 0 (a negative supremum means the shell
/// helps; beta_rho is a smallness index).
inline AttractionReport compute_beta_rho(const PotentialSpec& n, double rho, const RadialGrid& grid,
                                         double tW_moment = 0.0) {
    if (rho <= 0.0 || rho >= grid.rmax())
        throw std::domain_error("compute_beta_rho: rho in (0, rmax) required");
    AttractionReport rep;
    rep.rho = rho;
    rep.j0 = dyadic_floor_index(rho);

    auto nv = n.sample(grid);
    auto dn = n.sample_deriv(grid);
    std::vector<double> ratio(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        if (nv[i] >= 0.0)
            throw std::domain_error("compute_beta_rho: n >= 0 at node " + std::to_string(i) +
                                    " (sign violation)");
        ratio[i] = dn[i] / std::abs(nv[i]);
    }
    // Analytic kinds can be evaluated off the grid; a fixed subsampling of
    // each shell makes the suprema refinement-stable (the ratio need not be
    // monotone inside a shell).
    auto ratio_at = [&](double r) -> double {
        if (!n.has_exact_derivative()) return -std::numeric_limits<double>::infinity();
        const double v = n.eval(r);
        return v < 0.0 ? n.eval_deriv(r) / std::abs(v) : -std::numeric_limits<double>::infinity();
    };
    auto range_sup = [&](double lo, double hi) {
        double s = -std::numeric_limits<double>::infinity();
        constexpr int kSub = 33;
        if (n.has_exact_derivative()) {
            for (int k = 0; k <= kSub; ++k)
                s = std::max(s, ratio_at(lo + (hi - lo) * k / kSub));
        }
        return s;
    };

    KahanSum total;
    double ballmax = range_sup(rho * 1e-9, rho);  // the continuum sup includes r -> 0+
    for (int i = 0; i < grid.n && grid.r(i) <= rho; ++i) ballmax = std::max(ballmax, ratio[i]);
    rep.ball_sup = std::max(0.0, ballmax);
    total.add(rho * rep.ball_sup);

    const int jmax = static_cast<int>(std::ceil(std::log2(grid.rmax()) + 1e-12)) - 1;
    for (int j = rep.j0; j <= jmax; ++j) {
        const double lo = std::ldexp(1.0, j), hi = std::ldexp(1.0, j + 1);
        double s = range_sup(lo, std::min(hi, grid.rmax()));
        for (int i = 0; i < grid.n; ++i) {
            const double r = grid.r(i);
            if (r > lo && r <= hi) s = std::max(s, ratio[i]);
        }
        if (!std::isfinite(s)) continue;  // empty shell
        const double clamped = std::max(0.0, s);
        rep.shell_sup.emplace_back(j, clamped);
        total.add(std::ldexp(1.0, j + 1) * clamped);
    }

    // shells beyond rmax: closed-form bound where the ratio envelope is known
    rep.truncated = true;
    if (n.kind == PotentialKind::exp_well) {
        // ratio <= g'(r) = b/(1+r)^{gamma_g}; sum_{j>jmax} 2^{j+1} g'(2^j)
        const double q = std::ldexp(1.0, jmax + 1);
        const double gq = 1.0 - n.gamma_g;  // < 0
        rep.tail_bound = 2.0 * n.b * std::pow(q, gq) / (1.0 - std::pow(2.0, gq));
    } else if (n.kind == PotentialKind::zero || ratio[grid.n - 1] <= 0.0) {
        rep.tail_bound = 0.0;
    } else {
        rep.tail_known = false;
        rep.tail_bound = 0.0;
    }
    total.add(rep.tail_bound);
    rep.beta = total.value();

    rep.threshold = (grid.d > 3) ? 0.25 : 0.5 - tW_moment;
    rep.pass = rep.beta < rep.threshold;
    if (n.split_n2)
        rep.hardy_c1 = check_sobolev_split(n.split_n1_bound, *n.split_n2, grid.d, grid).c1;
    return rep;
}

// ---------------------------------------------------------------------------
// Long-range decay constants (conditions c1s-c3s) and B(tau0)

inline double compute_B_tau0(double a, int d, double gamma, double tau0) {
    if (a < 0.0 || d < 2 || tau0 <= 0.0)
        throw std::invalid_argument("compute_B_tau0: a >= 0, d >= 2, tau0 > 0 required");
    if (gamma == 0.0) throw std::domain_error("compute_B_tau0: gamma = 0 not admissible");
    const double F = std::pow(2.0, gamma) / (std::pow(2.0, gamma) - 1.0);
    const double m = std::max(1.0, 1.0 / tau0 - 1.0);
    return 16.0 * a * (static_cast<double>(d) * d - 1.0) * (1.0 + F * m) + a * (2.0 * a + 1.0);
}

struct LongRangeReport {
    double gamma = 0.0;
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;  // smallest constants per condition
    double a = 0.0;
    int failing_condition = 0;  // 1..3 when a is infinite
    std::vector<std::pair<double, double>> B_values;  // (tau0, B(tau0))
    bool d2_admissible = false;  // 1/(2 B(tau0) tau0^2) < 1 at the first tau0
};

/// Smallest a with |V1| <= a/(1+r)^gamma, |V2| <= a/(1+r)^{gamma+1} and
/// dV1 <= a/(1+r)^{gamma+1} on the grid.
inline LongRangeReport check_long_range(const PotentialSpec& V1, const PotentialSpec& V2, double gamma,
                                        const RadialGrid& grid, int d,
                                        const std::vector<double>& tau0_list = {1.0}) {
    if (gamma <= 0.0) throw std::invalid_argument("check_long_range: gamma > 0 required");
    LongRangeReport rep;
    rep.gamma = gamma;

    const bool v1_singular = V1.kind == PotentialKind::inverse_power && V1.c * V1.scale != 0.0;
    const bool v2_singular = V2.kind == PotentialKind::inverse_power && V2.c * V2.scale != 0.0;
    if (v1_singular || v2_singular) {
        rep.a = std::numeric_limits<double>::infinity();
        rep.failing_condition = v1_singular ? 1 : 2;
        return rep;
    }

    auto dV1 = V1.sample_deriv(grid);
    for (int i = 0; i < grid.n; ++i) {
        const double r = grid.r(i);
        rep.a1 = std::max(rep.a1, std::abs(V1.eval(r)) * std::pow(1.0 + r, gamma));
        rep.a2 = std::max(rep.a2, std::abs(V2.eval(r)) * std::pow(1.0 + r, gamma + 1.0));
        rep.a3 = std::max(rep.a3, std::max(0.0, dV1[i]) * std::pow(1.0 + r, gamma + 1.0));
    }
    rep.a = std::max({rep.a1, rep.a2, rep.a3});
    for (double t0 : tau0_list) rep.B_values.emplace_back(t0, compute_B_tau0(rep.a, d, gamma, t0));
    if (!rep.B_values.empty()) {
        const auto& [t0, B] = rep.B_values.front();
        rep.d2_admissible = B > 0.0 && 1.0 / (2.0 * B * t0 * t0) < 1.0;
    }
    return rep;
}

}  // namespace helmlab
