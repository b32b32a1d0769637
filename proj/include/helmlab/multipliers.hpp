#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "helmlab/grid.hpp"
#include "helmlab/numeric.hpp"

namespace helmlab {

enum class MultiplierKind { morawetz, piecewise, psi, appendix2 };

/// Surface delta atom: a distributional contribution of mass `mass` carried
/// on the sphere |x| = r. Atoms are kept symbolic, never smeared into the
/// grid; identity checks add their contribution analytically.
struct SurfaceAtom {
    double r = 0.0;
    double mass = 0.0;
};

/// Sampled multiplier data: Phi', Phi'', DeltaPhi, Delta^2 Phi plus the
/// auxiliary weights phi_R / psi_R of the piecewise and psi families.
struct MultiplierProfile {
    MultiplierKind kind = MultiplierKind::morawetz;
    RadialGrid grid;
    double R = 0.0, eps = 0.0, alpha = 0.0, kappa = 0.0;
    std::string h_profile_id;
    double snap_distance = 0.0;  // piecewise: |requested R - snapped R|

    std::vector<double> dPhi;     // Phi'
    std::vector<double> d2Phi;    // Phi''
    std::vector<double> lapPhi;   // Delta Phi
    std::vector<double> bilapPhi; // Delta^2 Phi, absolutely continuous part
    std::vector<SurfaceAtom> bilap_atoms;  // point/surface parts of Delta^2 Phi
    bool has_smooth_bilaplacian = false;
    std::vector<double> breakpoints;  // radii where higher derivatives jump

    std::vector<double> phi_R;                 // piecewise auxiliary weight
    std::vector<SurfaceAtom> lap_combo_atoms;  // atoms of Delta(2 phi_R - Delta Phi_R)
    std::vector<double> lap_combo_regular;     // its absolutely continuous part

    std::vector<double> psi, inv_psi;  // psi kind

    // appendix2 diagnostics
    double moment_th = 0.0;   // int_0^infty t h(t) dt (with tail bound)
    double measured_C = 0.0;  // constant of the inf bound on (0,R)
};

// ---------------------------------------------------------------------------
// Smooth Morawetz multiplier Phi(r) = (1+r^2)^{1/2} + r, scaled Phi_R = R Phi(./R)

namespace detail {
inline double morawetz_dphi(double s) { return s / std::sqrt(1.0 + s * s) + 1.0; }
inline double morawetz_d2phi(double s) { return std::pow(1.0 + s * s, -1.5); }
inline double morawetz_bilap(double s, int d) {
    const double q = 1.0 + s * s;
    return -(d - 1.0) * (d - 3.0) * std::pow(q, -1.5) - 6.0 * (d - 3.0) * std::pow(q, -2.5) -
           15.0 * std::pow(q, -3.5) - (d - 1.0) * (d - 3.0) / (s * s * s);
}
}  // namespace detail

inline MultiplierProfile morawetz_profile(double R, const RadialGrid& grid) {
    if (R <= 0.0 || R >= grid.rmax())
        throw std::invalid_argument("morawetz_profile: R in (0, rmax) required");
    MultiplierProfile p;
    p.kind = MultiplierKind::morawetz;
    p.grid = grid;
    p.R = R;
    p.has_smooth_bilaplacian = true;
    const int n = grid.n, d = grid.d;
    p.dPhi.resize(n);
    p.d2Phi.resize(n);
    p.lapPhi.resize(n);
    p.bilapPhi.resize(n);
    for (int i = 0; i < n; ++i) {
        const double s = grid.r(i) / R;  // exact scaling law Phi_R'(r) = Phi'(r/R)
        p.dPhi[i] = detail::morawetz_dphi(s);
        p.d2Phi[i] = detail::morawetz_d2phi(s) / R;
        p.lapPhi[i] = p.d2Phi[i] + (d - 1.0) * p.dPhi[i] / grid.r(i);
        p.bilapPhi[i] = detail::morawetz_bilap(s, d) / (R * R * R);
    }
    // d = 3: Delta |x| = 2/|x| whose Laplacian carries -8 pi delta_0; the
    // (d-1)(d-3)/|x|^3 part of the closed form vanishes but the atom does not.
    if (d == 3) p.bilap_atoms.push_back({0.0, -8.0 * 3.14159265358979323846264338327950288});
    return p;
}

// ---------------------------------------------------------------------------
// Piecewise family: grad Phi_R = (x/R) inside B(0,R), x/|x| outside;
// phi_R = (1/2R) chi_{|x|<R}.

inline MultiplierProfile piecewise_profile(double R, const RadialGrid& grid) {
    if (R < grid.h) throw std::invalid_argument("piecewise_profile: degenerate radius R < h");
    if (R > grid.rmax()) throw std::invalid_argument("piecewise_profile: R beyond rmax");
    MultiplierProfile p;
    p.kind = MultiplierKind::piecewise;
    p.grid = grid;
    const int m = grid.nearest_node(R);
    const double Rs = grid.r(m);  // snap to a node, record the distance
    p.R = Rs;
    p.snap_distance = std::abs(R - Rs);
    const int n = grid.n, d = grid.d;
    p.dPhi.resize(n);
    p.d2Phi.resize(n);
    p.lapPhi.resize(n);
    p.phi_R.resize(n);
    p.lap_combo_regular.resize(n);
    p.breakpoints = {Rs};
    for (int i = 0; i < n; ++i) {
        const double r = grid.r(i);
        if (i == m) {
            // midpoint values at the interface node keep the trapezoid rule
            // second order across the jump
            p.dPhi[i] = 1.0;
            p.d2Phi[i] = 0.5 / Rs;
            p.lapPhi[i] = (d - 0.5) / Rs;
            p.phi_R[i] = 0.25 / Rs;
            p.lap_combo_regular[i] = 0.5 * (d - 1.0) * (d - 3.0) / (Rs * Rs * Rs);
            continue;
        }
        const bool inside = r < Rs;
        p.dPhi[i] = inside ? r / Rs : 1.0;
        p.d2Phi[i] = inside ? 1.0 / Rs : 0.0;
        p.lapPhi[i] = inside ? d / Rs : (d - 1.0) / r;
        p.phi_R[i] = inside ? 0.5 / Rs : 0.0;
        p.lap_combo_regular[i] = inside ? 0.0 : (d - 1.0) * (d - 3.0) / (r * r * r);
    }
    p.lap_combo_atoms.push_back({Rs, (d - 1.0) / (Rs * Rs)});
    return p;
}

// ---------------------------------------------------------------------------
// psi_R weight

inline double psi_R_eval(double R, double r) { return R / (R * R + r * r); }

inline MultiplierProfile psi_weight(double R, const RadialGrid& grid) {
    if (R <= 0.0) throw std::invalid_argument("psi_weight: R > 0 required");
    MultiplierProfile p;
    p.kind = MultiplierKind::psi;
    p.grid = grid;
    p.R = R;
    p.psi.resize(grid.n);
    p.inv_psi.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        p.psi[i] = psi_R_eval(R, grid.r(i));
        p.inv_psi[i] = 1.0 / p.psi[i];
    }
    return p;
}

/// Bracketing bounds of psi_R: psi_R <= 1/R, psi_R <= R/r^2, psi_R <= 1/r,
/// and psi_R > (1/2R) chi_{B(0,R)}; all checked at the grid nodes.
struct PsiBracketing {
    bool below_invR = true;
    bool below_R_over_r2 = true;
    bool below_inv_r = true;
    bool above_half_indicator = true;
};

inline PsiBracketing psi_bracketing(const MultiplierProfile& p) {
    if (p.kind != MultiplierKind::psi) throw std::invalid_argument("psi_bracketing: psi profile required");
    PsiBracketing b;
    for (int i = 0; i < p.grid.n; ++i) {
        const double r = p.grid.r(i), v = p.psi[i];
        b.below_invR &= v <= 1.0 / p.R + 1e-15;
        b.below_R_over_r2 &= v <= p.R / (r * r) + 1e-15;
        b.below_inv_r &= v <= 1.0 / r + 1e-15;
        if (r < p.R) b.above_half_indicator &= v > 0.5 / p.R;
    }
    return b;
}

// ---------------------------------------------------------------------------
// A2 condition on the radial line (1-D surrogate of the cube condition;
// psi_R is radial and the radial product upper-bounds the behavior the test
// is after, namely R-independence).

struct A2Report {
    std::vector<std::pair<double, double>> sup_product_per_R;  // (R, sup over intervals)
    double max_over_R = 0.0;
    double min_over_R = std::numeric_limits<double>::infinity();
};

/// closed-form interval averages: int psi_R = atan(r/R), int 1/psi_R = R r + r^3/(3R)
inline double a2_product_psi(double R, double a, double b) {
    const double avg_w = (std::atan(b / R) - std::atan(a / R)) / (b - a);
    const double avg_iw = R + (a * a + a * b + b * b) / (3.0 * R);
    return avg_w * avg_iw;
}

/// generic interval A2 product by composite Simpson averages of w and 1/w
inline double a2_product_numeric(const std::function<double(double)>& w, double a, double b,
                                 int panels = 64) {
    if (b <= a) {
        const double v = w(0.5 * (a + b));
        return v * (1.0 / v);
    }
    const double hh = (b - a) / (2 * panels);
    KahanSum sw, siw;
    for (int k = 0; k <= 2 * panels; ++k) {
        const double x = a + hh * k;
        const double coef = (k == 0 || k == 2 * panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sw.add(coef * w(x));
        siw.add(coef / w(x));
    }
    const double norm = hh / 3.0 / (b - a);
    return (sw.value() * norm) * (siw.value() * norm);
}

inline A2Report check_A2(const std::vector<double>& R_list,
                         const std::vector<std::pair<double, double>>& intervals, double rmax) {
    if (intervals.empty()) throw std::domain_error("check_A2: empty interval family");
    if (R_list.empty()) throw std::domain_error("check_A2: empty R list");
    A2Report rep;
    for (double R : R_list) {
        double sup = 0.0;
        for (auto [center, halfwidth] : intervals) {
            const double a = center - halfwidth, b = center + halfwidth;
            if (a <= 0.0 || b > rmax)
                throw std::domain_error("check_A2: interval outside (0, rmax)");
            sup = std::max(sup, a2_product_psi(R, a, b));
        }
        rep.sup_product_per_R.emplace_back(R, sup);
        rep.max_over_R = std::max(rep.max_over_R, sup);
        rep.min_over_R = std::min(rep.min_over_R, sup);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Appendix-2 constructor (dimension 3): solve Delta^2 Phi = -(eps/R^3) chi_(0,R) - h(r)/r
// with Phi' = psi' + phi', psi'' from the h-part, phi'' from the compactly
// supported part m(t) = (eps/R^3) chi_(0,R)(t).

/// Nonnegative profile h(t) with closed-form tail bounds beyond a radius T.
struct HProfile {
    std::string id = "zero";
    std::function<double(double)> h = [](double) { return 0.0; };
    std::function<double(double)> tail_t_moment = [](double) { return 0.0; };  // int_T^inf t h dt
    std::function<double(double)> tail_mass = [](double) { return 0.0; };      // int_T^inf h dt

    static HProfile zero() { return {}; }

    /// h(t) = c / (1+t)^p with p > 2 (integrable t-moment)
    static HProfile rational(double c, double p) {
        if (c < 0.0 || p <= 2.0) throw std::invalid_argument("HProfile::rational: c >= 0, p > 2");
        HProfile out;
        out.id = "rational(c=" + std::to_string(c) + ",p=" + std::to_string(p) + ")";
        out.h = [c, p](double t) { return c * std::pow(1.0 + t, -p); };
        out.tail_t_moment = [c, p](double T) {
            return c * (std::pow(1.0 + T, 2.0 - p) / (p - 2.0) - std::pow(1.0 + T, 1.0 - p) / (p - 1.0));
        };
        out.tail_mass = [c, p](double T) { return c * std::pow(1.0 + T, 1.0 - p) / (p - 1.0); };
        return out;
    }

    /// sampled table; must have decayed to ~0 before its last sample
    static HProfile sampled(std::vector<double> rs, std::vector<double> vs) {
        if (rs.size() != vs.size() || rs.size() < 2)
            throw std::invalid_argument("HProfile::sampled: matching samples required");
        if (std::abs(vs.back()) > 1e-12)
            throw std::runtime_error("HProfile::sampled: non-integrable tail (profile not decayed)");
        HProfile out;
        out.id = "sampled(" + std::to_string(rs.size()) + ")";
        out.h = [rs = std::move(rs), vs = std::move(vs)](double t) {
            if (t <= rs.front()) return vs.front();
            if (t >= rs.back()) return 0.0;
            auto it = std::upper_bound(rs.begin(), rs.end(), t);
            const std::size_t j = static_cast<std::size_t>(it - rs.begin());
            const double s = (t - rs[j - 1]) / (rs[j] - rs[j - 1]);
            return vs[j - 1] * (1.0 - s) + vs[j] * s;
        };
        return out;
    }
};

namespace detail {
/// phi'' of the compact part, closed form
inline double appendix2_phi2(double eps, double R, double r) {
    if (r <= R) return eps * (R * R - r * r) / (10.0 * R * R * R) + eps / (15.0 * R);
    return eps * R * R / (15.0 * r * r * r);
}
/// phi' = int_0^r phi'', closed form
inline double appendix2_phi1(double eps, double R, double r) {
    if (r <= R) return eps * (R * R * r - r * r * r / 3.0) / (10.0 * R * R * R) + eps * r / (15.0 * R);
    return eps / 6.0 - eps * R * R / (30.0 * r * r);
}
}  // namespace detail

inline MultiplierProfile appendix2_construct(const HProfile& hp, double eps, double R, double alpha,
                                             double kappa, const RadialGrid& grid) {
    if (grid.d != 3) throw std::invalid_argument("appendix2_construct: dimension 3 required");
    if (eps <= 0.0 || R <= 0.0 || alpha <= 0.0)
        throw std::invalid_argument("appendix2_construct: positive eps, R, alpha required");
    if (!(kappa > 0.0 && kappa < 0.5))
        throw std::invalid_argument("appendix2_construct: kappa in (0, 1/2) required");
    if (R >= grid.rmax()) throw std::invalid_argument("appendix2_construct: R < rmax required");

    const int n = grid.n;
    const double rmax = grid.rmax();

    // moment int_0^inf t h dt: grid quadrature plus declared tail
    KahanSum mom;
    double f_prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = grid.r(i) * hp.h(grid.r(i));
        mom.add(0.5 * grid.h * (f_prev + f));
        f_prev = f;
    }
    const double moment = mom.value() + hp.tail_t_moment(rmax);

    const double lhs = alpha + eps / 6.0 + moment;
    if (!(lhs < kappa))
        throw std::runtime_error("appendix2_construct: hypothesis violated, alpha + eps/6 + int t h = " +
                                 std::to_string(lhs) + " >= kappa = " + std::to_string(kappa));

    MultiplierProfile p;
    p.kind = MultiplierKind::appendix2;
    p.grid = grid;
    p.R = R;
    p.eps = eps;
    p.alpha = alpha;
    p.kappa = kappa;
    p.h_profile_id = hp.id;
    p.moment_th = moment;
    p.has_smooth_bilaplacian = true;
    p.breakpoints = {R};

    // cumulative integrals of the h-part
    std::vector<double> A3(n), Hcum(n);  // int_0^r t^3 h dt, int_0^r h dt
    {
        KahanSum a3, hc;
        double f3_prev = 0.0, fh_prev = hp.h(0.0);
        for (int i = 0; i < n; ++i) {
            const double t = grid.r(i);
            const double f3 = t * t * t * hp.h(t);
            const double fh = hp.h(t);
            a3.add(0.5 * grid.h * (f3_prev + f3));
            hc.add(0.5 * grid.h * (fh_prev + fh));
            A3[i] = a3.value();
            Hcum[i] = hc.value();
            f3_prev = f3;
            fh_prev = fh;
        }
    }
    const double Htotal = Hcum[n - 1] + hp.tail_mass(rmax);

    p.dPhi.resize(n);
    p.d2Phi.resize(n);
    p.lapPhi.resize(n);
    p.bilapPhi.resize(n);

    std::vector<double> psi2(n);
    for (int i = 0; i < n; ++i) {
        const double r = grid.r(i);
        psi2[i] = A3[i] / (3.0 * r * r * r) + (Htotal - Hcum[i]) / 3.0;
    }
    // psi' = alpha + int_0^r psi'' (psi''(0) = Htotal/3)
    std::vector<double> psi1(n);
    {
        KahanSum acc;
        double prev = Htotal / 3.0;
        for (int i = 0; i < n; ++i) {
            acc.add(0.5 * grid.h * (prev + psi2[i]));
            psi1[i] = alpha + acc.value();
            prev = psi2[i];
        }
    }

    double minC = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double r = grid.r(i);
        const double phi1 = detail::appendix2_phi1(eps, R, r);
        const double phi2 = detail::appendix2_phi2(eps, R, r);
        p.dPhi[i] = psi1[i] + phi1;
        p.d2Phi[i] = psi2[i] + phi2;
        p.lapPhi[i] = p.d2Phi[i] + 2.0 * p.dPhi[i] / r;
        p.bilapPhi[i] = -(r < R ? eps / (R * R * R) : 0.0) - hp.h(r) / r;
        if (r < R) minC = std::min(minC, std::min(p.dPhi[i] / r, p.d2Phi[i]) * R / eps);
    }
    p.measured_C = minC;

    // conclusions hold at every node by construction; refuse if rounding broke them
    for (int i = 0; i < n; ++i) {
        if (!(p.dPhi[i] > alpha && p.dPhi[i] < kappa) || p.d2Phi[i] < -1e-14)
            throw std::runtime_error("appendix2_construct: conclusion violated at node " +
                                     std::to_string(i));
    }
    return p;
}

// ---------------------------------------------------------------------------

/// Pointwise Hessian quadratic form of the mode:
/// Phi''|du|^2 + (Phi'/r) l(l+d-2) |u|^2 / r^2.
inline std::vector<double> quadratic_form_density(const MultiplierProfile& p, const ModeFunction& u) {
    if (!p.grid.same_mesh(u.grid))
        throw std::invalid_argument("quadratic_form_density: profile and mode on different grids");
    if (p.dPhi.empty()) throw std::invalid_argument("quadratic_form_density: profile has no multiplier data");
    auto du = u.derivative();
    const RadialGrid& g = u.grid;
    std::vector<double> out(g.n);
    const double c = g.coupling();
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r(i);
        out[i] = p.d2Phi[i] * std::norm(du[i]) + (p.dPhi[i] / r) * c * std::norm(u.values[i]) / (r * r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bilaplacian reconstruction residual

/// Reconstructs Delta^2 Phi from Phi' by successive central differencing and
/// compares with `target` over an interior window, skipping nodes within the
/// stencil reach of declared breakpoints. The residual is normalized by the
/// sup of the target over the window (plus an absolute floor), which keeps
/// the number meaningful where the target vanishes identically.
inline double bilaplacian_residual(const MultiplierProfile& p, const std::vector<double>& target,
                                   double r_lo = 0.0,
                                   double r_hi = std::numeric_limits<double>::infinity()) {
    const RadialGrid& g = p.grid;
    if (g.n < 5) throw std::invalid_argument("bilaplacian_residual: fewer than 5 nodes");
    if (static_cast<int>(target.size()) != g.n)
        throw std::invalid_argument("bilaplacian_residual: target size mismatch");
    if (p.dPhi.empty()) throw std::invalid_argument("bilaplacian_residual: profile has no multiplier data");

    // radial bilaplacian in terms of Phi' alone:
    // Delta^2 Phi = Phi'''' + 2(d-1) Phi'''/r + (d-1)(d-3)(Phi''/r^2 - Phi'/r^3)
    auto p2 = derivative2(p.dPhi, g.h);
    auto p3 = derivative2(p2, g.h);
    auto p4 = derivative2(p3, g.h);
    const double cd = (g.d - 1.0) * (g.d - 3.0);
    std::vector<double> bilap(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r(i);
        bilap[i] = p4[i] + 2.0 * (g.d - 1.0) * p3[i] / r + cd * (p2[i] / (r * r) - p.dPhi[i] / (r * r * r));
    }

    const int margin = 3;  // one-sided closures compound near the ends
    auto excluded = [&](double r) {
        for (double bp : p.breakpoints)
            if (std::abs(r - bp) <= 4.0 * g.h) return true;
        return false;
    };
    double scale = 0.0, worst = 0.0;
    for (int i = margin; i < g.n - margin; ++i) {
        const double r = g.r(i);
        if (r < r_lo || r > r_hi || excluded(r)) continue;
        scale = std::max(scale, std::abs(target[i]));
    }
    for (int i = margin; i < g.n - margin; ++i) {
        const double r = g.r(i);
        if (r < r_lo || r > r_hi || excluded(r)) continue;
        worst = std::max(worst, std::abs(bilap[i] - target[i]));
    }
    return worst / (scale + 1e-12);
}

}  // namespace helmlab
