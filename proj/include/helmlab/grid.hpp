#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmlab/numeric.hpp"

namespace helmlab {

/// Uniform radial mesh for one spherical-harmonic mode in R^d.
/// Nodes are r_i = i*h for i = 1..n (the origin is excluded; regularity is
/// handled by the Liouville form of the operator). Mode functions represent
/// one coefficient u(x) = f(r) Y_l(x/|x|) with Y_l L2-normalized on the
/// sphere, so d-dimensional integrals of radial weights reduce exactly to
/// 1-D integrals without degeneracy factors.
struct RadialGrid {
    int d = 3;
    int ell = 0;
    int n = 0;
    double h = 0.0;
    double omega = 0.0;  // surface area of the unit sphere in R^d

    static RadialGrid make(int d, int ell, int n, double rmax) {
        if (d < 2) throw std::invalid_argument("RadialGrid: d >= 2 required");
        if (ell < 0) throw std::invalid_argument("RadialGrid: ell >= 0 required");
        if (n < 8) throw std::invalid_argument("RadialGrid: n >= 8 required");
        if (rmax <= 0.0) throw std::invalid_argument("RadialGrid: rmax > 0 required");
        RadialGrid g;
        g.d = d;
        g.ell = ell;
        g.n = n;
        g.h = rmax / n;
        g.omega = unit_sphere_area(d);
        return g;
    }

    double r(int i) const { return h * (i + 1); }
    double rmax() const { return h * n; }
    /// tangential coupling l(l+d-2) of the mode
    double coupling() const { return static_cast<double>(ell) * (ell + d - 2); }
    /// curvature term (d-1)(d-3)/4 of the Liouville form
    double curvature() const { return 0.25 * (d - 1.0) * (d - 3.0); }

    bool same_mesh(const RadialGrid& o) const {
        return d == o.d && ell == o.ell && n == o.n && h == o.h;
    }
    /// index of the node nearest to radius r
    int nearest_node(double rr) const {
        int i = static_cast<int>(std::lround(rr / h)) - 1;
        return std::clamp(i, 0, n - 1);
    }
};

/// Complex samples of one spherical-harmonic coefficient on a RadialGrid.
struct ModeFunction {
    RadialGrid grid;
    std::vector<complexd> values;
    std::vector<complexd> deriv;  // optional radial derivative samples

    ModeFunction() = default;
    explicit ModeFunction(const RadialGrid& g) : grid(g), values(g.n, complexd{0.0, 0.0}) {}

    bool has_deriv() const { return deriv.size() == values.size(); }

    /// stored derivative if present, else 4th-order differences
    std::vector<complexd> derivative() const {
        if (has_deriv()) return deriv;
        return derivative4(values, grid.h);
    }

    static ModeFunction from_profile(const RadialGrid& g, const std::function<complexd(double)>& f) {
        ModeFunction u(g);
        for (int i = 0; i < g.n; ++i) u.values[i] = f(g.r(i));
        return u;
    }

    static ModeFunction from_real_profile(const RadialGrid& g, const std::function<double(double)>& f) {
        ModeFunction u(g);
        for (int i = 0; i < g.n; ++i) u.values[i] = complexd{f(g.r(i)), 0.0};
        return u;
    }

    /// Discrete indicator of B(0,R) with the composite-rule boundary sample:
    /// the node nearest R carries sqrt(1/2) so that |u|^2 quadrature matches
    /// the half-weight truncation of the trapezoid rule. R is snapped to the
    /// nearest node.
    static ModeFunction ball_indicator(const RadialGrid& g, double R) {
        if (R <= g.h || R > g.rmax())
            throw std::invalid_argument("ball_indicator: R in (h, rmax] required");
        const int m = g.nearest_node(R);
        ModeFunction u(g);
        for (int i = 0; i < m; ++i) u.values[i] = 1.0;
        u.values[m] = std::sqrt(0.5);
        return u;
    }

    /// Plain indicator of the annulus (a, b] by node membership.
    static ModeFunction shell_indicator(const RadialGrid& g, double a, double b) {
        if (!(0.0 < a && a < b && b <= g.rmax()))
            throw std::invalid_argument("shell_indicator: 0 < a < b <= rmax required");
        ModeFunction u(g);
        for (int i = 0; i < g.n; ++i) {
            const double r = g.r(i);
            if (r > a && r <= b * (1.0 + 1e-14)) u.values[i] = 1.0;
        }
        return u;
    }
};

// ---------------------------------------------------------------------------
// Quadrature

/// Prefix integrals P[i] = int_0^{r_i} g(r) omega r^{d-1} dr by the composite
/// trapezoid rule. The integrand at the origin is linearly extrapolated from
/// the first two nodes (clamped at 0 for these nonnegative densities), which
/// keeps integrable weight singularities at second order. Compensated
/// summation throughout.
inline std::vector<double> ball_prefix(const RadialGrid& g, const std::vector<double>& density) {
    if (static_cast<int>(density.size()) != g.n)
        throw std::invalid_argument("ball_prefix: density size mismatch");
    std::vector<double> prefix(g.n);
    KahanSum acc;
    auto f_at = [&](int i) { return density[i] * g.omega * std::pow(g.r(i), g.d - 1); };
    double f_prev = std::max(0.0, 2.0 * f_at(0) - f_at(1));  // value at r = 0
    for (int i = 0; i < g.n; ++i) {
        const double f = f_at(i);
        acc.add(0.5 * g.h * (f_prev + f));
        prefix[i] = acc.value();
        f_prev = f;
    }
    return prefix;
}

/// int_{B(0,R)} g dx from precomputed prefix integrals; R between nodes is
/// handled by a partial trapezoid with linear interpolation of the integrand.
inline double ball_eval(const RadialGrid& g, const std::vector<double>& density,
                        const std::vector<double>& prefix, double R) {
    if (R <= 0.0) return 0.0;
    if (R >= g.rmax()) return prefix[g.n - 1];
    auto f_at = [&](int i) { return density[i] * g.omega * std::pow(g.r(i), g.d - 1); };
    // last node with r_i <= R
    int m = static_cast<int>(std::floor(R / g.h * (1.0 + 1e-14))) - 1;
    m = std::min(m, g.n - 1);
    if (m < 0) {
        const double fR = f_at(0) * (R / g.r(0));
        return 0.5 * R * fR;
    }
    const double rm = g.r(m);
    double base = prefix[m];
    if (R > rm && m + 1 < g.n) {
        const double t = (R - rm) / g.h;
        const double fR = f_at(m) * (1.0 - t) + f_at(m + 1) * t;
        base += 0.5 * (R - rm) * (f_at(m) + fR);
    }
    return base;
}

inline std::vector<double> abs2(const std::vector<complexd>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::norm(v[i]);
    return out;
}

/// int_{R^d} dens(r) dx for a complex pointwise density (same trapezoid rule
/// as ball_prefix); used by the integration-by-parts identity evaluator.
inline complexd radial_integral_complex(const RadialGrid& g, const std::vector<complexd>& dens) {
    if (static_cast<int>(dens.size()) != g.n)
        throw std::invalid_argument("radial_integral_complex: size mismatch");
    KahanSum re, im;
    auto f_at = [&](int i) { return dens[i] * (g.omega * std::pow(g.r(i), g.d - 1)); };
    complexd f_prev = 2.0 * f_at(0) - f_at(1);  // linear extrapolation to r = 0
    for (int i = 0; i < g.n; ++i) {
        const complexd f = f_at(i);
        re.add(0.5 * g.h * (f_prev.real() + f.real()));
        im.add(0.5 * g.h * (f_prev.imag() + f.imag()));
        f_prev = f;
    }
    return {re.value(), im.value()};
}

/// Same rule for sign-indefinite real densities (no clamp at the origin).
inline double radial_integral_real(const RadialGrid& g, const std::vector<double>& dens) {
    if (static_cast<int>(dens.size()) != g.n)
        throw std::invalid_argument("radial_integral_real: size mismatch");
    KahanSum acc;
    auto f_at = [&](int i) { return dens[i] * g.omega * std::pow(g.r(i), g.d - 1); };
    double f_prev = 2.0 * f_at(0) - f_at(1);
    for (int i = 0; i < g.n; ++i) {
        const double f = f_at(i);
        acc.add(0.5 * g.h * (f_prev + f));
        f_prev = f;
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Radial weights

/// Radial weight descriptor for integrate_radial. `singularity_order` is the
/// declared blow-up exponent s in w ~ r^{-s} as r -> 0.
struct RadialWeightFn {
    std::string name = "one";
    std::function<double(double)> w = [](double) { return 1.0; };
    double singularity_order = 0.0;
};

inline RadialWeightFn weight_one() { return {}; }

inline RadialWeightFn weight_inv_power(int k) {
    RadialWeightFn f;
    f.name = "1/r^" + std::to_string(k);
    f.w = [k](double r) { return std::pow(r, -k); };
    f.singularity_order = k;
    return f;
}

/// (1+r)^{sign*(1+alpha)} weights of the long-range estimates
inline RadialWeightFn weight_one_plus_r_power(double alpha, int sign) {
    RadialWeightFn f;
    f.name = std::string("(1+r)^") + (sign > 0 ? "+" : "-") + std::to_string(1.0 + alpha);
    f.w = [alpha, sign](double r) { return std::pow(1.0 + r, sign > 0 ? (1.0 + alpha) : -(1.0 + alpha)); };
    return f;
}

inline RadialWeightFn weight_sampled(std::string name, std::vector<double> samples, const RadialGrid& g,
                                     double singularity = 0.0) {
    if (static_cast<int>(samples.size()) != g.n)
        throw std::invalid_argument("weight_sampled: size mismatch");
    RadialWeightFn f;
    f.name = std::move(name);
    const double h = g.h;
    const int n = g.n;
    f.w = [samples = std::move(samples), h, n](double r) {
        int i = static_cast<int>(std::lround(r / h)) - 1;
        i = std::clamp(i, 0, n - 1);
        return samples[i];
    };
    f.singularity_order = singularity;
    return f;
}

struct IntegralResult {
    double value = 0.0;
    double first_node_contribution = 0.0;
    bool singular_warning = false;
};

/// Sum of w(r_i) |u_i|^2 against the volume measure (composite trapezoid,
/// ascending index, compensated). Weights singular faster than r^{-(d-1)}
/// trigger a warning and the first-node share is reported separately so
/// truncation sensitivity at the origin is visible.
inline IntegralResult integrate_radial_full(const ModeFunction& u, const RadialWeightFn& wf) {
    const RadialGrid& g = u.grid;
    std::vector<double> density(g.n);
    for (int i = 0; i < g.n; ++i) density[i] = wf.w(g.r(i)) * std::norm(u.values[i]);
    auto prefix = ball_prefix(g, density);
    IntegralResult out;
    out.value = prefix[g.n - 1];
    out.first_node_contribution = prefix[0];
    out.singular_warning = wf.singularity_order > static_cast<double>(g.d - 1);
    return out;
}

inline double integrate_radial(const ModeFunction& u, const RadialWeightFn& wf = weight_one()) {
    return integrate_radial_full(u, wf).value;
}

/// Surface integral int_{|x|=R} |u|^2 dsigma_R = omega R^{d-1} |u(R)|^2 with
/// u(R) linearly interpolated between adjacent nodes.
inline double integrate_sphere(const ModeFunction& u, double R) {
    const RadialGrid& g = u.grid;
    if (R <= g.h || R >= g.rmax()) throw std::domain_error("integrate_sphere: R in (h, rmax) required");
    const int m = static_cast<int>(std::floor(R / g.h * (1.0 + 1e-14))) - 1;
    const double t = (R - g.r(m)) / g.h;
    const complexd uR = u.values[m] * (1.0 - t) + u.values[std::min(m + 1, g.n - 1)] * t;
    return g.omega * std::pow(R, g.d - 1) * std::norm(uR);
}

// ---------------------------------------------------------------------------
// Morrey-Campanato-type norms

/// The sup over R > 0 is discretized to dyadic radii in [max(rho,h), rmax]
/// plus the endpoints; the continuum sup is bracketed by the dyadic one
/// within a factor 2, which the tests assert on random data.
inline std::vector<double> dyadic_radii(const RadialGrid& g, double rho) {
    const double lo = std::max(rho, g.h);
    const double hi = g.rmax();
    std::vector<double> Rs;
    Rs.push_back(lo);
    const int jlo = static_cast<int>(std::ceil(std::log2(lo) - 1e-12));
    for (int j = jlo;; ++j) {
        const double R = std::ldexp(1.0, j);
        if (R > hi * (1.0 + 1e-14)) break;
        if (R > lo * (1.0 + 1e-14)) Rs.push_back(R);
    }
    if (Rs.back() < hi * (1.0 - 1e-14)) Rs.push_back(hi);
    return Rs;
}

struct NormXDetail {
    double value_sq = 0.0;  // ||u||_X^2
    double argmax_R = 0.0;
};

inline NormXDetail norm_X_detail(const ModeFunction& u, double rho = 0.0) {
    const RadialGrid& g = u.grid;
    auto density = abs2(u.values);
    auto prefix = ball_prefix(g, density);
    NormXDetail out;
    for (double R : dyadic_radii(g, rho)) {
        const double v = ball_eval(g, density, prefix, R) / R;
        if (v > out.value_sq) {
            out.value_sq = v;
            out.argmax_R = R;
        }
    }
    return out;
}

/// ||u||_{X_rho} = sup_{R >= rho} ( (1/R) int_{B(0,R)} |u|^2 )^{1/2}; rho = 0 gives X.
inline double norm_X(const ModeFunction& u, double rho = 0.0) {
    return std::sqrt(norm_X_detail(u, rho).value_sq);
}

inline int dyadic_floor_index(double rho) {
    // j0 with 2^{j0} < rho <= 2^{j0+1}
    return static_cast<int>(std::ceil(std::log2(rho) - 1e-12)) - 1;
}

/// int_{B(0,R)} |u|^2 dx
inline double ball_mass(const ModeFunction& u, double R) {
    auto density = abs2(u.values);
    auto prefix = ball_prefix(u.grid, density);
    return ball_eval(u.grid, density, prefix, R);
}

/// sup over the dyadic R-set of R^{-p} int_{B(0,R)} |u|^2 dx
inline double sup_ball_power(const ModeFunction& u, double p, double rho = 0.0) {
    const RadialGrid& g = u.grid;
    auto density = abs2(u.values);
    auto prefix = ball_prefix(g, density);
    double best = 0.0;
    for (double R : dyadic_radii(g, rho))
        best = std::max(best, ball_eval(g, density, prefix, R) / std::pow(R, p));
    return best;
}

/// sup over the dyadic R-set of R^{-2} int_{|x|=R} |u|^2 dsigma_R
inline double sup_surface(const ModeFunction& u, double rho = 0.0) {
    const RadialGrid& g = u.grid;
    double best = 0.0;
    for (double R : dyadic_radii(g, rho)) {
        if (R <= g.h || R >= g.rmax()) continue;
        best = std::max(best, integrate_sphere(u, R) / (R * R));
    }
    return best;
}

/// ||f||_{X*} dyadic-shell sum. Shells are the grid nodes partitioned by
/// membership in C_j = {2^j < r <= 2^{j+1}} (midpoint-rule node masses, so
/// nothing leaks across shell boundaries); for rho > 0 the shells start at
/// j0 per 2^{j0} < rho <= 2^{j0+1} and the ball term
/// (rho int_{B(0,rho)} |f|^2)^{1/2} is added.
inline double norm_Xstar(const ModeFunction& f, double rho = 0.0) {
    const RadialGrid& g = f.grid;
    auto density = abs2(f.values);
    const int jhi = static_cast<int>(std::ceil(std::log2(g.rmax()) + 1e-12)) - 1;
    int jlo = static_cast<int>(std::floor(std::log2(g.h) + 1e-12));
    KahanSum total;
    if (rho > 0.0) {
        auto prefix = ball_prefix(g, density);
        jlo = std::max(jlo, dyadic_floor_index(rho));
        total.add(std::sqrt(rho * ball_eval(g, density, prefix, rho)));
    }
    std::vector<KahanSum> shell_mass(static_cast<std::size_t>(jhi - jlo + 1));
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r(i);
        const double w = (i + 1 == g.n ? 0.5 : 1.0) * g.h * g.omega * std::pow(r, g.d - 1);
        int j = static_cast<int>(std::ceil(std::log2(r) - 1e-12)) - 1;  // r in C_j
        if (j < jlo) {
            if (rho > 0.0) continue;  // below j0: covered by the ball term
            j = jlo;                  // lowest shell absorbs the first cells
        }
        if (j > jhi) continue;
        shell_mass[static_cast<std::size_t>(j - jlo)].add(w * density[i]);
    }
    for (int j = jlo; j <= jhi; ++j) {
        const double mass = shell_mass[static_cast<std::size_t>(j - jlo)].value();
        if (mass > 0.0) total.add(std::sqrt(std::ldexp(1.0, j + 1) * mass));
    }
    return total.value();
}

// ---------------------------------------------------------------------------

/// Pointwise |grad u|^2 density of the mode: |u'|^2 + l(l+d-2) |u|^2 / r^2.
inline std::vector<double> grad_density(const ModeFunction& u) {
    const RadialGrid& g = u.grid;
    auto du = u.derivative();
    std::vector<double> out(g.n);
    const double c = g.coupling();
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r(i);
        out[i] = std::norm(du[i]) + c * std::norm(u.values[i]) / (r * r);
    }
    return out;
}

inline ModeFunction grad_density_mode(const ModeFunction& u) {
    ModeFunction out(u.grid);
    auto d = grad_density(u);
    for (int i = 0; i < u.grid.n; ++i) out.values[i] = complexd{d[i], 0.0};
    return out;
}

/// ||grad u||_{L2}^2 of the mode against a radial weight.
inline double integrate_grad(const ModeFunction& u, const RadialWeightFn& wf = weight_one()) {
    const RadialGrid& g = u.grid;
    auto dens = grad_density(u);
    for (int i = 0; i < g.n; ++i) dens[i] *= wf.w(g.r(i));
    return ball_prefix(g, dens).back();
}

// ---------------------------------------------------------------------------
// Discrete Hardy probe

inline double hardy_ratio(const ModeFunction& u) {
    const double num = integrate_radial(u, weight_inv_power(2));
    const double den = integrate_grad(u);
    if (den <= 0.0) throw std::invalid_argument("hardy_ratio: zero trial function");
    return num / den;
}

/// Trial function r^{(2-d)/2+delta} tapered to vanish at both grid ends.
inline ModeFunction hardy_extremal_trial(const RadialGrid& g, double delta) {
    const double p = 0.5 * (2.0 - g.d) + delta;
    const double rmax = g.rmax();
    return ModeFunction::from_real_profile(g, [p, rmax](double r) {
        return std::pow(r, p) * (1.0 - r / rmax);
    });
}

/// Worst ratio int |u|^2/r^2 dx / int |grad u|^2 dx over a trial family that
/// vanishes at both grid ends. Must not exceed (2/(d-2))^2 + O(h).
inline double check_discrete_hardy(const RadialGrid& g, int trials, std::uint64_t seed = 7) {
    if (g.d < 3) throw std::invalid_argument("check_discrete_hardy: d >= 3 required");
    const double rmax = g.rmax();
    double worst = 0.0;
    auto consider = [&](const ModeFunction& u) { worst = std::max(worst, hardy_ratio(u)); };

    consider(ModeFunction::from_real_profile(g, [rmax](double r) {
        return r * std::exp(-r) * (1.0 - r / rmax);
    }));
    for (double delta : {0.5, 0.25, 0.125, 0.0625}) consider(hardy_extremal_trial(g, delta));

    SplitMix64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        const double c1 = rng.uniform(0.1 * rmax, 0.7 * rmax);
        const double c2 = rng.uniform(0.1 * rmax, 0.7 * rmax);
        const double w1 = rng.uniform(0.05 * rmax, 0.3 * rmax);
        const double w2 = rng.uniform(0.05 * rmax, 0.3 * rmax);
        const double a2 = rng.uniform(-1.0, 1.0);
        consider(ModeFunction::from_real_profile(g, [=](double r) {
            const double bump = std::exp(-sqr((r - c1) / w1)) + a2 * std::exp(-sqr((r - c2) / w2));
            return bump * (r / rmax) * (1.0 - r / rmax);
        }));
    }
    return worst;
}

}  // namespace helmlab
