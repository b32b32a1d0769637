#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "helmlab/grid.hpp"
#include "helmlab/helmholtz.hpp"
#include "helmlab/multipliers.hpp"
#include "helmlab/numeric.hpp"

namespace helmlab {

enum class IdentityId { A1_1, A1_2, A1_3, A1_4, A1_13, A1_14 };

inline std::string identity_name(IdentityId id) {
    switch (id) {
        case IdentityId::A1_1: return "A1-1";
        case IdentityId::A1_2: return "A1-2";
        case IdentityId::A1_3: return "A1-3";
        case IdentityId::A1_4: return "A1-4";
        case IdentityId::A1_13: return "A1-13";
        case IdentityId::A1_14: return "A1-14";
    }
    return "?";
}

/// Radial test weight phi with exact first/second derivatives. The
/// varphi_ball kind is the ball average weight (1/2R) chi_{B(0,R)}; it pairs only with
/// the piecewise multiplier (the smeared derivatives do not exist).
struct TestWeight {
    enum class Kind { smooth, varphi_ball };
    Kind kind = Kind::smooth;
    std::string name = "one";
    double R = 0.0;  // varphi_ball radius
    std::function<double(double)> phi = [](double) { return 1.0; };
    std::function<double(double)> dphi = [](double) { return 0.0; };
    std::function<double(double)> d2phi = [](double) { return 0.0; };
};

inline TestWeight weight_phi_one() { return {}; }

inline TestWeight weight_phi_gaussian(double center, double width) {
    TestWeight w;
    w.name = "gaussian";
    w.phi = [=](double r) { return std::exp(-sqr((r - center) / width)); };
    w.dphi = [=](double r) { return -2.0 * (r - center) / (width * width) * std::exp(-sqr((r - center) / width)); };
    w.d2phi = [=](double r) {
        const double t = (r - center) / width;
        return (4.0 * t * t - 2.0) / (width * width) * std::exp(-t * t);
    };
    return w;
}

inline TestWeight weight_phi_psi(double R) {
    TestWeight w;
    w.name = "psi_R";
    w.phi = [R](double r) { return R / (R * R + r * r); };
    w.dphi = [R](double r) { return -2.0 * r * R / sqr(R * R + r * r); };
    w.d2phi = [R](double r) {
        const double q = R * R + r * r;
        return -2.0 * R / (q * q) + 8.0 * r * r * R / (q * q * q);
    };
    return w;
}

/// (1+r)^{-1-alpha}
inline TestWeight weight_phi_one_plus_r(double alpha) {
    TestWeight w;
    w.name = "(1+r)^-(1+a)";
    w.phi = [alpha](double r) { return std::pow(1.0 + r, -1.0 - alpha); };
    w.dphi = [alpha](double r) { return -(1.0 + alpha) * std::pow(1.0 + r, -2.0 - alpha); };
    w.d2phi = [alpha](double r) { return (1.0 + alpha) * (2.0 + alpha) * std::pow(1.0 + r, -3.0 - alpha); };
    return w;
}

inline TestWeight weight_phi_varphi(double R) {
    TestWeight w;
    w.kind = TestWeight::Kind::varphi_ball;
    w.name = "varphi_R";
    w.R = R;
    w.phi = [R](double r) { return r < R ? 0.5 / R : 0.0; };
    return w;
}

struct IdentityReport {
    IdentityId id = IdentityId::A1_1;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    std::vector<std::pair<std::string, double>> lhs_terms, rhs_terms;
};

namespace detail {

struct IdentityContext {
    const RadialGrid& g;
    const ResolventProblem& pb;
    const ModeFunction& u;
    std::vector<complexd> du;
    std::vector<double> absu2;     // |u|^2
    std::vector<double> graddens;  // |grad u|^2 mode density
    double eps_signed;             // branch * eps
    double tau_ident;              // tau as it enters the identities (-tau u convention)
};

inline double ig_real(const IdentityContext& c, const std::function<double(int)>& f) {
    std::vector<double> dens(c.g.n);
    for (int i = 0; i < c.g.n; ++i) dens[i] = f(i);
    return radial_integral_real(c.g, dens);
}

inline complexd ig_cplx(const IdentityContext& c, const std::function<complexd(int)>& f) {
    std::vector<complexd> dens(c.g.n);
    for (int i = 0; i < c.g.n; ++i) dens[i] = f(i);
    return radial_integral_complex(c.g, dens);
}

/// integral of the point/surface parts of Delta^2 Phi against |u|^2
inline double bilap_atom_integral(const MultiplierProfile& p, const ModeFunction& u) {
    double total = 0.0;
    for (const auto& a : p.bilap_atoms) {
        if (a.r == 0.0) {
            // |u(0)|^2: only the l = 0 mode reaches the origin. With
            // v = r^{(d-1)/2} u and v(0) = 0 known exactly, u(0) = v'(0)
            // comes from a one-sided cubic fit at third order.
            if (u.grid.ell != 0) continue;
            const double p2 = 0.5 * (u.grid.d - 1.0);
            auto v_at = [&](int k) { return u.values[k] * std::pow(u.grid.r(k), p2); };
            const complexd u0 = (18.0 * v_at(0) - 9.0 * v_at(1) + 2.0 * v_at(2)) / (6.0 * u.grid.h);
            total += a.mass * std::norm(u0);
        } else {
            const int node = u.grid.nearest_node(a.r);
            total += a.mass * u.grid.omega * std::pow(a.r, u.grid.d - 1) * std::norm(u.values[node]);
        }
    }
    return total;
}

}  // namespace detail

/// Discrete realization of the integration-by-parts identities for
/// -Delta u + V u +- i eps u - tau u = f with radial weights phi and
/// multipliers Phi. Both sides are evaluated by quadrature; the relative
/// residual isolates the discretization error of u.
inline IdentityReport check_identity(IdentityId id, const ResolventSolution& sol,
                                     const ResolventProblem& pb, const TestWeight& phi,
                                     const MultiplierProfile* profile = nullptr) {
    const RadialGrid& g = pb.grid;
    if (!g.same_mesh(sol.u.grid)) throw std::domain_error("check_identity: mismatched grids");
    if (profile && !g.same_mesh(profile->grid)) throw std::domain_error("check_identity: profile grid mismatch");
    if (!sol.u.has_deriv()) throw std::runtime_error("check_identity: derivative data required");
    if (pb.boundary != BoundaryKind::dirichlet)
        throw std::runtime_error("check_identity: plain (dirichlet) problems only");

    const bool needs_profile = id != IdentityId::A1_1 && id != IdentityId::A1_2;
    if (needs_profile && (!profile || profile->dPhi.empty()))
        throw std::invalid_argument("check_identity: multiplier profile required for this identity");

    detail::IdentityContext c{g, pb, sol.u, sol.u.deriv, abs2(sol.u.values), grad_density(sol.u),
                              pb.branch() * pb.epsilon, -pb.tau_shift()};

    const bool split = id == IdentityId::A1_13 || id == IdentityId::A1_14;
    std::vector<double> V(g.n, 0.0), V1d(g.n, 0.0), V2(g.n, 0.0);
    for (const auto& part : pb.potentials) {
        auto vals = part.sample(g);
        for (int i = 0; i < g.n; ++i) V[i] += vals[i];
        if (split) {
            if (part.role == PotentialRole::V2_long_range) {
                for (int i = 0; i < g.n; ++i) V2[i] += vals[i];
            } else {
                auto dv = part.sample_deriv(g);
                for (int i = 0; i < g.n; ++i) V1d[i] += dv[i];
            }
        }
    }
    if (!split) {
        for (const auto& part : pb.potentials) {
            auto dv = part.sample_deriv(g);
            for (int i = 0; i < g.n; ++i) V1d[i] += dv[i];
        }
    }

    IdentityReport rep;
    rep.id = id;
    auto add_lhs = [&](const std::string& name, double v) { rep.lhs_terms.emplace_back(name, v); };
    auto add_rhs = [&](const std::string& name, double v) { rep.rhs_terms.emplace_back(name, v); };

    const bool has_phi = id == IdentityId::A1_1 || id == IdentityId::A1_2 || id == IdentityId::A1_4 ||
                         id == IdentityId::A1_14;
    std::vector<double> phi_v(g.n, 0.0);
    if (has_phi) {
        if (phi.kind == TestWeight::Kind::varphi_ball && profile &&
            profile->kind == MultiplierKind::piecewise) {
            phi_v = profile->phi_R;  // sampled consistently with the snapped R
        } else {
            for (int i = 0; i < g.n; ++i) phi_v[i] = phi.phi(g.r(i));
        }
    }

    // phi-side terms shared by A1-1 / A1-4 / A1-14
    auto phi_scalar_terms = [&](double sign) {
        add_lhs("phi_grad", -sign * detail::ig_real(c, [&](int i) { return phi_v[i] * c.graddens[i]; }));
        add_lhs("phi_V", -sign * detail::ig_real(c, [&](int i) { return phi_v[i] * V[i] * c.absu2[i]; }));
        add_lhs("phi_tau", sign * c.tau_ident *
                               detail::ig_real(c, [&](int i) { return phi_v[i] * c.absu2[i]; }));
    };

    // multiplier-side terms shared by A1-3 / A1-4 / A1-13 / A1-14
    auto multiplier_terms = [&]() {
        auto qf = quadratic_form_density(*profile, sol.u);
        add_lhs("hessian_form", detail::ig_real(c, [&](int i) { return qf[i]; }));
        const auto& dPhi = profile->dPhi;
        if (split) {
            add_lhs("V1_grad", -0.5 * detail::ig_real(c, [&](int i) { return V1d[i] * dPhi[i] * c.absu2[i]; }));
            add_lhs("V2_lap", 0.5 * detail::ig_real(c, [&](int i) { return V2[i] * profile->lapPhi[i] * c.absu2[i]; }));
            add_lhs("V2_gradsq", detail::ig_real(c, [&](int i) {
                        return V2[i] * dPhi[i] * std::real(std::conj(sol.u.values[i]) * c.du[i]);
                    }));
        } else {
            add_lhs("V_grad", -0.5 * detail::ig_real(c, [&](int i) { return V1d[i] * dPhi[i] * c.absu2[i]; }));
        }
        add_rhs("eps_flux", c.eps_signed * detail::ig_cplx(c, [&](int i) {
                                return dPhi[i] * std::conj(c.du[i]) * sol.u.values[i];
                            }).imag());
        // The f-multiplier pairing enters with a plus sign: multiplying the
        // equation by (grad Phi . grad u_bar + (1/2) lap Phi u_bar) and taking
        // real parts puts + Re int f (...) on this side; the one-dimensional
        // oracle u = exp(-x^2), Phi = x^2/2 pins the sign.
        add_rhs("f_multiplier", detail::ig_cplx(c, [&](int i) {
                                    return pb.rhs.values[i] * (dPhi[i] * std::conj(c.du[i]) +
                                                               0.5 * profile->lapPhi[i] * std::conj(sol.u.values[i]));
                                }).real());
    };

    // 1/4 int Delta(2 phi - Delta Phi) |u|^2 for the A1-4 / A1-14 pairings
    auto combo_terms = [&]() {
        if (profile->kind == MultiplierKind::piecewise) {
            if (phi.kind != TestWeight::Kind::varphi_ball || std::abs(phi.R - profile->R) > 0.5 * g.h)
                throw std::invalid_argument("check_identity: piecewise profile pairs with varphi_R of the same R");
            add_lhs("combo_regular", 0.25 * detail::ig_real(c, [&](int i) {
                        return profile->lap_combo_regular[i] * c.absu2[i];
                    }));
            double atoms = 0.0;
            for (const auto& a : profile->lap_combo_atoms) {
                const int node = g.nearest_node(a.r);
                atoms += 0.25 * a.mass * g.omega * std::pow(a.r, g.d - 1) * c.absu2[node];
            }
            add_lhs("combo_atom", atoms);
        } else {
            if (phi.kind != TestWeight::Kind::smooth)
                throw std::invalid_argument("check_identity: smooth profile needs a smooth phi");
            if (!profile->has_smooth_bilaplacian)
                throw std::invalid_argument("check_identity: profile lacks a smooth bilaplacian");
            add_lhs("combo_smooth", 0.25 * detail::ig_real(c, [&](int i) {
                        const double r = g.r(i);
                        const double lap_phi = phi.d2phi(r) + (g.d - 1.0) * phi.dphi(r) / r;
                        return (2.0 * lap_phi - profile->bilapPhi[i]) * c.absu2[i];
                    }));
            if (!profile->bilap_atoms.empty())
                add_lhs("combo_atom", -0.25 * detail::bilap_atom_integral(*profile, sol.u));
        }
    };

    switch (id) {
        case IdentityId::A1_1: {
            if (phi.kind != TestWeight::Kind::smooth)
                throw std::invalid_argument("check_identity: A1-1 needs a smooth phi");
            add_lhs("phi_grad", detail::ig_real(c, [&](int i) { return phi_v[i] * c.graddens[i]; }));
            add_lhs("phi_lap", -0.5 * detail::ig_real(c, [&](int i) {
                        const double r = g.r(i);
                        return (phi.d2phi(r) + (g.d - 1.0) * phi.dphi(r) / r) * c.absu2[i];
                    }));
            add_lhs("phi_V", detail::ig_real(c, [&](int i) { return phi_v[i] * V[i] * c.absu2[i]; }));
            add_lhs("phi_tau", -c.tau_ident * detail::ig_real(c, [&](int i) { return phi_v[i] * c.absu2[i]; }));
            add_rhs("f_pairing", detail::ig_cplx(c, [&](int i) {
                                     return phi_v[i] * pb.rhs.values[i] * std::conj(sol.u.values[i]);
                                 }).real());
            break;
        }
        case IdentityId::A1_2: {
            if (phi.kind != TestWeight::Kind::smooth)
                throw std::invalid_argument("check_identity: A1-2 needs a smooth phi");
            add_lhs("eps_mass", c.eps_signed * detail::ig_real(c, [&](int i) { return phi_v[i] * c.absu2[i]; }));
            add_lhs("phi_flux", detail::ig_cplx(c, [&](int i) {
                                    return phi.dphi(g.r(i)) * c.du[i] * std::conj(sol.u.values[i]);
                                }).imag());
            add_rhs("f_pairing", detail::ig_cplx(c, [&](int i) {
                                     return phi_v[i] * pb.rhs.values[i] * std::conj(sol.u.values[i]);
                                 }).imag());
            break;
        }
        case IdentityId::A1_3:
        case IdentityId::A1_13: {
            multiplier_terms();
            if (!profile->has_smooth_bilaplacian)
                throw std::invalid_argument("check_identity: profile lacks a smooth bilaplacian");
            add_lhs("bilap", -0.25 * detail::ig_real(c, [&](int i) { return profile->bilapPhi[i] * c.absu2[i]; }));
            if (!profile->bilap_atoms.empty())
                add_lhs("bilap_atom", -0.25 * detail::bilap_atom_integral(*profile, sol.u));
            break;
        }
        case IdentityId::A1_4:
        case IdentityId::A1_14: {
            multiplier_terms();
            combo_terms();
            phi_scalar_terms(1.0);
            add_rhs("f_pairing", -detail::ig_cplx(c, [&](int i) {
                                      return phi_v[i] * pb.rhs.values[i] * std::conj(sol.u.values[i]);
                                  }).real());
            break;
        }
    }

    KahanSum l, r, mag;
    for (auto& [_, v] : rep.lhs_terms) {
        l.add(v);
        mag.add(std::abs(v));
    }
    for (auto& [_, v] : rep.rhs_terms) {
        r.add(v);
        mag.add(std::abs(v));
    }
    rep.lhs = l.value();
    rep.rhs = r.value();
    const double floor = 1e-14 * mag.value();
    const double denom = std::abs(rep.lhs) + std::abs(rep.rhs) + floor;
    rep.residual = denom > 0.0 ? std::abs(rep.lhs - rep.rhs) / denom : 0.0;
    return rep;
}

}  // namespace helmlab
