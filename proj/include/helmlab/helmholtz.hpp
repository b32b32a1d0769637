#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmlab/grid.hpp"
#include "helmlab/numeric.hpp"
#include "helmlab/potentials.hpp"
#include "helmlab/tridiag.hpp"

namespace helmlab {

enum class ResolventSign { plus, minus };  // sign of the i*eps term
enum class TauSign { minus, plus };        // -tau u (spectral) or +tau u
enum class BoundaryKind { dirichlet, sponge };

struct SpongeParams {
    double width_fraction = 0.25;  // damped fraction of the domain
    double strength = 1.0;
};

/// One stationary problem (-Delta + sum V_k +- i eps -+ tau) u = f for a
/// single spherical-harmonic mode. eps > 0 strictly; the limiting-absorption
/// regime is studied only through sweeps eps -> eps_min.
struct ResolventProblem {
    RadialGrid grid;
    std::vector<PotentialSpec> potentials;
    ResolventSign sign = ResolventSign::plus;
    double epsilon = 0.0;
    double tau = 0.0;
    TauSign tau_sign = TauSign::minus;
    BoundaryKind boundary = BoundaryKind::dirichlet;
    SpongeParams sponge;
    ModeFunction rhs;

    double potential_value(double r) const {
        double v = 0.0;
        for (const auto& p : potentials) v += p.eval(r);
        return v;
    }
    double potential_deriv(double r) const {
        double v = 0.0;
        for (const auto& p : potentials) v += p.eval_deriv(r);
        return v;
    }
    /// signed shift of the tau term as it appears on the operator diagonal
    double tau_shift() const { return tau_sign == TauSign::minus ? -tau : tau; }
    double branch() const { return sign == ResolventSign::plus ? 1.0 : -1.0; }
};

struct AssembledOperator {
    Tridiagonal matrix;            // acts on v = r^{(d-1)/2} u, interior nodes only
    std::vector<double> q_eff;     // V + (l(l+d-2) + (d-1)(d-3)/4)/r^2
    std::vector<double> cap;       // sponge absorption profile Gamma(r)
};

/// Liouville (symmetrizing) form: with v = r^{(d-1)/2} u the discrete
/// operator is -v'' + q_eff v + (+-i eps + tau_shift) v on nodes r_i = i h.
/// Dirichlet walls at r = 0 and at r = rmax (the last node is pinned, so the
/// unknowns are the n-1 interior nodes). The sponge option adds -i Gamma(r) v
/// (sign following the resolvent branch) on the last width fraction.
inline AssembledOperator assemble_operator(const ResolventProblem& pb) {
    const RadialGrid& g = pb.grid;
    const int m = g.n - 1;  // interior nodes
    AssembledOperator op;
    op.q_eff.resize(m);
    op.cap.assign(m, 0.0);
    op.matrix.diag.resize(m);
    op.matrix.lower.assign(m - 1, complexd{-1.0 / (g.h * g.h), 0.0});
    op.matrix.upper = op.matrix.lower;

    const double centrifugal = g.coupling() + g.curvature();
    const complexd shift{pb.tau_shift(), pb.branch() * pb.epsilon};
    const double r0 = (1.0 - pb.sponge.width_fraction) * g.rmax();
    for (int i = 0; i < m; ++i) {
        const double r = g.r(i);
        op.q_eff[i] = pb.potential_value(r) + centrifugal / (r * r);
        complexd diag = 2.0 / (g.h * g.h) + op.q_eff[i] + shift;
        if (pb.boundary == BoundaryKind::sponge && r > r0) {
            const double x = (r - r0) / (g.rmax() - r0);
            op.cap[i] = pb.sponge.strength * x * x;
            // the +i eps branch radiates e^{-i sqrt(tau) r}; +i Gamma damps it
            // (and conjugate-symmetrically for the other branch)
            diag += complexd{0.0, pb.branch() * op.cap[i]};
        }
        op.matrix.diag[i] = diag;
    }
    return op;
}

struct ResolventSolution {
    ModeFunction u;              // with 4th-order derivative samples
    double residual = 0.0;       // max relative discrete-equation residual
    double boundary_leak = 0.0;  // |u| at the last interior node / max |u|
};

inline std::vector<complexd> to_liouville(const ModeFunction& u) {
    const RadialGrid& g = u.grid;
    std::vector<complexd> v(g.n);
    const double p = 0.5 * (g.d - 1.0);
    for (int i = 0; i < g.n; ++i) v[i] = u.values[i] * std::pow(g.r(i), p);
    return v;
}

inline std::vector<complexd> liouville_rhs(const ResolventProblem& pb) {
    auto v = to_liouville(pb.rhs);
    v.resize(pb.grid.n - 1);  // interior rows
    return v;
}

/// Max over interior rows of |(discrete operator applied to u) - f| divided
/// by (max|f| + floor), evaluated in the Liouville variable; the given last
/// node sample enters the final row as the wall value.
inline double residual_check(const ResolventProblem& pb, const ModeFunction& u) {
    if (!pb.grid.same_mesh(u.grid)) throw std::invalid_argument("residual_check: grid mismatch");
    auto op = assemble_operator(pb);
    const RadialGrid& g = pb.grid;
    const int m = g.n - 1;
    auto v = to_liouville(u);
    auto g_rhs = liouville_rhs(pb);
    const double ih2 = 1.0 / (g.h * g.h);
    double fmax = 0.0;
    for (const auto& x : g_rhs) fmax = std::max(fmax, std::abs(x));
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        complexd row = op.matrix.diag[i] * v[i];
        row -= ih2 * ((i > 0 ? v[i - 1] : complexd{0.0, 0.0}) + v[i + 1]);
        worst = std::max(worst, std::abs(row - g_rhs[i]));
    }
    return worst / (fmax + 1e-300);
}

inline ResolventSolution solve_resolvent(const ResolventProblem& pb) {
    if (!(pb.epsilon > 0.0))
        throw std::invalid_argument("solve_resolvent: eps > 0 strictly required");
    if (!pb.grid.same_mesh(pb.rhs.grid))
        throw std::invalid_argument("solve_resolvent: rhs grid mismatch");
    const RadialGrid& g = pb.grid;
    auto op = assemble_operator(pb);
    auto v = solve_tridiagonal(op.matrix, liouville_rhs(pb));

    ResolventSolution sol;
    sol.u = ModeFunction(g);
    const double p = 0.5 * (g.d - 1.0);
    for (int i = 0; i + 1 < g.n; ++i) sol.u.values[i] = v[i] * std::pow(g.r(i), -p);
    sol.u.values[g.n - 1] = complexd{0.0, 0.0};  // pinned wall node
    sol.u.deriv = derivative4(sol.u.values, g.h);

    double umax = 0.0;
    for (const auto& x : sol.u.values) umax = std::max(umax, std::abs(x));
    sol.boundary_leak = umax > 0.0 ? std::abs(sol.u.values[g.n - 2]) / umax : 0.0;
    sol.residual = residual_check(pb, sol.u);
    return sol;
}

// ---------------------------------------------------------------------------
// Right-hand-side families

inline ModeFunction rhs_gaussian(const RadialGrid& g, double center, double width) {
    if (width <= 0.0) throw std::invalid_argument("rhs_gaussian: width > 0 required");
    return ModeFunction::from_real_profile(
        g, [=](double r) { return std::exp(-sqr((r - center) / width)); });
}

/// indicator of the dyadic shell C_j
inline ModeFunction rhs_shell(const RadialGrid& g, int j) {
    const double a = std::ldexp(1.0, j), b = std::ldexp(1.0, j + 1);
    if (a >= g.rmax()) throw std::invalid_argument("rhs_shell: shell beyond rmax");
    return ModeFunction::shell_indicator(g, a, std::min(b, g.rmax()));
}

}  // namespace helmlab
