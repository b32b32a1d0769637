#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmlab/grid.hpp"
#include "helmlab/helmholtz.hpp"
#include "helmlab/numeric.hpp"

namespace helmlab {

// ---------------------------------------------------------------------------
// Implicit-shift QL for symmetric tridiagonal matrices, with eigenvector
// accumulation. Fixed shift strategy, no randomized initialization, so runs
// are bit-reproducible.

struct SymtriEigen {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // vectors[k][i], l2-orthonormal
};

inline SymtriEigen symtri_eigen_ql(std::vector<double> d, std::vector<double> off) {
    const int n = static_cast<int>(d.size());
    if (static_cast<int>(off.size()) != n - 1)
        throw std::invalid_argument("symtri_eigen_ql: off-diagonal size mismatch");
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = off[i];
    std::vector<std::vector<double>> z(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) z[i][i] = 1.0;  // z[row][column]

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw std::runtime_error("symtri_eigen_ql: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[k][i + 1];
                        z[k][i + 1] = s * z[k][i] + c * f;
                        z[k][i] = c * z[k][i] - s * f;
                    }
                }
                if (r == 0.0 && m - 1 >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    SymtriEigen out;
    out.values.resize(n);
    out.vectors.assign(n, std::vector<double>(n));
    for (int k = 0; k < n; ++k) {
        out.values[k] = d[order[k]];
        for (int i = 0; i < n; ++i) out.vectors[k][i] = z[i][order[k]];
    }
    return out;
}

/// eigenvalues only (no vector accumulation); Pal-Walker-Kahan style scan
inline std::vector<double> symtri_eigenvalues(std::vector<double> d, std::vector<double> off) {
    const int n = static_cast<int>(d.size());
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = off[i];
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw std::runtime_error("symtri_eigenvalues: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && m - 1 >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

// Complex-symmetric variant (c^2 + s^2 = 1 rotations preserve complex
// symmetry); used for the sponge/CAP spectra. Eigen-pairs satisfy
// T phi = lambda phi with the bilinear normalization phi^T phi = 1.
struct ComplexSymtriEigen {
    std::vector<complexd> values;
    std::vector<std::vector<complexd>> vectors;
};

inline ComplexSymtriEigen symtri_eigen_ql_complex(std::vector<complexd> d, std::vector<complexd> off) {
    const int n = static_cast<int>(d.size());
    if (static_cast<int>(off.size()) != n - 1)
        throw std::invalid_argument("symtri_eigen_ql_complex: off-diagonal size mismatch");
    std::vector<complexd> e(n, complexd{0.0, 0.0});
    for (int i = 0; i + 1 < n; ++i) e[i] = off[i];
    std::vector<std::vector<complexd>> z(n, std::vector<complexd>(n, complexd{0.0, 0.0}));
    for (int i = 0; i < n; ++i) z[i][i] = 1.0;

    auto csqrt_branch = [](complexd a, complexd b) {
        // sqrt(a^2 + b^2) with the branch aligned to a (complex copysign)
        complexd r = std::sqrt(a * a + b * b);
        if (std::real(std::conj(a) * r) < 0.0) r = -r;
        return r;
    };

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 4.0 * std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 80) throw std::runtime_error("symtri_eigen_ql_complex: too many iterations");
                complexd g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                complexd r = csqrt_branch(g, complexd{1.0, 0.0});
                g = d[m] - d[l] + e[l] / (g + r);
                complexd s{1.0, 0.0}, c{1.0, 0.0}, p{0.0, 0.0};
                for (int i = m - 1; i >= l; --i) {
                    complexd f = s * e[i];
                    const complexd b = c * e[i];
                    r = std::sqrt(f * f + g * g);
                    e[i + 1] = r;
                    if (std::abs(r) < 1e-300) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[k][i + 1];
                        z[k][i + 1] = s * z[k][i] + c * f;
                        z[k][i] = c * z[k][i] - s * f;
                    }
                }
                if (std::abs(r) < 1e-300 && m - 1 >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::real(d[a]) != std::real(d[b])) return std::real(d[a]) < std::real(d[b]);
        return std::imag(d[a]) < std::imag(d[b]);
    });
    ComplexSymtriEigen out;
    out.values.resize(n);
    out.vectors.assign(n, std::vector<complexd>(n));
    for (int k = 0; k < n; ++k) {
        out.values[k] = d[order[k]];
        for (int i = 0; i < n; ++i) out.vectors[k][i] = z[i][order[k]];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum of the discrete H = -Delta + V per mode (Liouville variable,
// Dirichlet walls). Real case: l2_h-orthonormal eigenvectors.

struct Spectrum {
    RadialGrid grid;
    bool is_free = false;      // no potential
    bool complex_cap = false;  // sponge/CAP spectrum
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // [k][interior node]
    std::vector<complexd> values_c;
    std::vector<std::vector<complexd>> vectors_c;

    int interior() const { return grid.n - 1; }
    double max_abs_value() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        for (auto& v : values_c) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Full eigendecomposition of the assembled operator without the spectral
/// shift (eps must be absent). CAP (sponge) runs produce complex spectra and
/// are limited to n <= 2000.
inline Spectrum diagonalize(const ResolventProblem& pb) {
    if (pb.epsilon != 0.0) throw std::invalid_argument("diagonalize: eps must be absent (0)");
    if (pb.tau != 0.0) throw std::invalid_argument("diagonalize: tau must be absent (0)");
    const RadialGrid& g = pb.grid;
    ResolventProblem clean = pb;
    clean.sign = ResolventSign::minus;  // CAP spectra use H - i Gamma (Im lambda <= 0)
    auto op = assemble_operator(clean);
    const int m = g.n - 1;
    Spectrum spec;
    spec.grid = g;
    spec.is_free = pb.potentials.empty();
    const double scale = 1.0 / std::sqrt(g.h);  // l2 -> l2_h normalization

    if (pb.boundary == BoundaryKind::sponge) {
        if (g.n > 2000) throw std::invalid_argument("diagonalize: CAP case limited to n <= 2000");
        spec.complex_cap = true;
        std::vector<complexd> diag(op.matrix.diag), off(op.matrix.upper);
        auto eig = symtri_eigen_ql_complex(std::move(diag), std::move(off));
        spec.values_c = std::move(eig.values);
        spec.vectors_c = std::move(eig.vectors);
        for (auto& vec : spec.vectors_c)
            for (auto& x : vec) x *= scale;
        return spec;
    }

    std::vector<double> diag(m), off(m - 1);
    for (int i = 0; i < m; ++i) diag[i] = op.matrix.diag[i].real();
    for (int i = 0; i + 1 < m; ++i) off[i] = op.matrix.upper[i].real();
    auto eig = symtri_eigen_ql(std::move(diag), std::move(off));
    spec.values = std::move(eig.values);
    spec.vectors = std::move(eig.vectors);
    for (auto& vec : spec.vectors)
        for (auto& x : vec) x *= scale;
    return spec;
}

// ---------------------------------------------------------------------------
// coefficient transforms (real spectra)

inline std::vector<complexd> spectral_coefficients(const Spectrum& spec, const ModeFunction& u0) {
    if (!spec.grid.same_mesh(u0.grid)) throw std::invalid_argument("spectral_coefficients: grid mismatch");
    if (spec.complex_cap) throw std::invalid_argument("spectral_coefficients: real spectrum required");
    auto v = to_liouville(u0);
    const int m = spec.interior();
    std::vector<complexd> c(m);
    for (int k = 0; k < m; ++k) {
        KahanSum re, im;
        const auto& phi = spec.vectors[k];
        for (int i = 0; i < m; ++i) {
            re.add(phi[i] * v[i].real());
            im.add(phi[i] * v[i].imag());
        }
        c[k] = complexd{re.value(), im.value()} * spec.grid.h;
    }
    return c;
}

inline ModeFunction from_coefficients(const Spectrum& spec, const std::vector<complexd>& c,
                                      const std::function<complexd(int)>& gain) {
    const RadialGrid& g = spec.grid;
    const int m = spec.interior();
    std::vector<complexd> v(m, complexd{0.0, 0.0});
    for (int k = 0; k < m; ++k) {
        const complexd a = c[k] * gain(k);
        if (a == complexd{0.0, 0.0}) continue;
        const auto& phi = spec.vectors[k];
        for (int i = 0; i < m; ++i) v[i] += a * phi[i];
    }
    ModeFunction out(g);
    const double p = 0.5 * (g.d - 1.0);
    for (int i = 0; i < m; ++i) out.values[i] = v[i] * std::pow(g.r(i), -p);
    out.values[g.n - 1] = complexd{0.0, 0.0};
    return out;
}

/// l2_h norm squared of the Liouville variable (the mode's L2 mass up to the
/// quadrature convention)
inline double liouville_norm_sq(const ModeFunction& u) {
    auto v = to_liouville(u);
    KahanSum s;
    for (int i = 0; i + 1 < u.grid.n; ++i) s.add(std::norm(v[i]));
    return s.value() * u.grid.h;
}

// ---------------------------------------------------------------------------

struct ProjectionResult {
    ModeFunction u;
    int modes = 0;  // eigenvalues inside the interval
    bool empty = false;
};

/// Spectral projection onto [lo, hi] applied to u0 (real spectra).
inline ProjectionResult spectral_project(const Spectrum& spec, double lo, double hi,
                                         const ModeFunction& u0) {
    auto c = spectral_coefficients(spec, u0);
    ProjectionResult out;
    for (int k = 0; k < spec.interior(); ++k)
        if (spec.values[k] >= lo && spec.values[k] <= hi) ++out.modes;
    out.empty = out.modes == 0;
    out.u = from_coefficients(spec, c, [&](int k) {
        return (spec.values[k] >= lo && spec.values[k] <= hi) ? complexd{1.0, 0.0} : complexd{0.0, 0.0};
    });
    return out;
}

/// D^{1/2} u0 = (-Delta_0)^{1/4} u0 through the free spectrum of the mode.
inline ModeFunction half_derivative(const ModeFunction& u0, const Spectrum& free_spec) {
    if (!free_spec.is_free) throw std::invalid_argument("half_derivative: free spectrum required");
    for (double l : free_spec.values)
        if (l < 0.0) throw std::runtime_error("half_derivative: negative free eigenvalue");
    auto c = spectral_coefficients(free_spec, u0);
    return from_coefficients(free_spec, c, [&](int k) {
        return complexd{std::pow(free_spec.values[k], 0.25), 0.0};
    });
}

/// e^{itH} u0 by phase multiplication in the eigenbasis.
inline ModeFunction propagate(const Spectrum& spec, const ModeFunction& u0, double t) {
    auto c = spectral_coefficients(spec, u0);
    return from_coefficients(spec, c, [&](int k) {
        return std::exp(complexd{0.0, t * spec.values[k]});
    });
}

/// ||H^{1/4} u0||^2 = sum sqrt(lambda_k) |c_k|^2, the potential-adapted
/// comparison weight for the half-derivative data norm (requires a
/// nonnegative spectrum).
inline double v_adapted_quarter_norm_sq(const Spectrum& spec, const ModeFunction& u0) {
    if (spec.complex_cap) throw std::invalid_argument("v_adapted_quarter_norm_sq: real spectra only");
    auto c = spectral_coefficients(spec, u0);
    KahanSum s;
    for (int k = 0; k < spec.interior(); ++k) {
        if (spec.values[k] < 0.0)
            throw std::runtime_error("v_adapted_quarter_norm_sq: negative eigenvalue");
        s.add(std::sqrt(spec.values[k]) * std::norm(c[k]));
    }
    return s.value();
}

// ---------------------------------------------------------------------------
// Windowed time-integrated smoothing functional.

struct SmoothingConfig {
    double T = 1.0;    // window [-T, T]
    double dt = 0.0;   // time-quadrature step; must resolve the fastest phase
    bool half_deriv = true;
    const Spectrum* free_spectrum = nullptr;  // required when half_deriv
    RadialWeightFn weight = weight_one();
    double project_lo = -std::numeric_limits<double>::infinity();
    double project_hi = std::numeric_limits<double>::infinity();
};

/// int_{-T}^{T} int w(x) |D^{1/2} e^{itH} P u0|^2 dx dt by trapezoid time
/// quadrature in the eigenbasis. Guards: T below the domain-traversal bound
/// rmax / (4 max sqrt(lambda)) and dt <= pi / (4 max lambda); a finite
/// Dirichlet box has pure point spectrum, so unwindowed time integrals would
/// be contaminated by recurrences.
inline double smoothing_functional(const Spectrum& spec, const ModeFunction& u0,
                                   const SmoothingConfig& cfg) {
    if (spec.complex_cap) throw std::invalid_argument("smoothing_functional: real spectra only");
    const double lam_max = spec.max_abs_value();
    const double Tguard = spec.grid.rmax() / (4.0 * std::sqrt(lam_max));
    if (cfg.T > Tguard)
        throw std::runtime_error(
            "smoothing_functional: window T = " + std::to_string(cfg.T) +
            " beyond the traversal guard T* = " + std::to_string(Tguard) +
            "; shrink T or enlarge the domain");
    const double dt_max = 3.14159265358979323846 / (4.0 * lam_max);
    const double dt = cfg.dt > 0.0 ? cfg.dt : dt_max;
    if (dt > dt_max)
        throw std::runtime_error("smoothing_functional: dt too coarse for the fastest phase");
    if (cfg.half_deriv && (!cfg.free_spectrum || !cfg.free_spectrum->is_free))
        throw std::invalid_argument("smoothing_functional: free spectrum required for D^{1/2}");

    auto c = spectral_coefficients(spec, u0);
    for (int k = 0; k < spec.interior(); ++k)
        if (spec.values[k] < cfg.project_lo || spec.values[k] > cfg.project_hi)
            c[k] = complexd{0.0, 0.0};

    const int steps = std::max(2, static_cast<int>(std::ceil(2.0 * cfg.T / dt)));
    const double step = 2.0 * cfg.T / steps;
    KahanSum acc;
    for (int s = 0; s <= steps; ++s) {
        const double t = -cfg.T + step * s;
        ModeFunction w = from_coefficients(spec, c, [&](int k) {
            return std::exp(complexd{0.0, t * spec.values[k]});
        });
        if (cfg.half_deriv) w = half_derivative(w, *cfg.free_spectrum);
        const double space = integrate_radial(w, cfg.weight);
        acc.add(space * step * ((s == 0 || s == steps) ? 0.5 : 1.0));
    }
    return acc.value();
}

}  // namespace helmlab
