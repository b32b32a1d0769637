#include <cmath>

#include "doctest.h"
#include "helmlab/spectral.hpp"

using namespace helmlab;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

ResolventProblem spectral_problem(int d, int ell, int n, double rmax,
                                  std::vector<PotentialSpec> pots = {}) {
    ResolventProblem pb;
    pb.grid = RadialGrid::make(d, ell, n, rmax);
    pb.potentials = std::move(pots);
    pb.rhs = ModeFunction(pb.grid);
    return pb;
}

ModeFunction gaussian_data(const RadialGrid& g, double c, double w) {
    auto u = ModeFunction::from_real_profile(g, [=](double r) { return std::exp(-sqr((r - c) / w)); });
    u.values[g.n - 1] = complexd{0.0, 0.0};
    return u;
}

double mode_distance(const ModeFunction& a, const ModeFunction& b) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < a.grid.n; ++i) {
        num += std::norm(a.values[i] - b.values[i]);
        den += std::norm(b.values[i]);
    }
    return std::sqrt(num / (den + 1e-300));
}

}  // namespace

TEST_CASE("free Dirichlet spectrum") {
    const int n = 600;
    const double L = 30.0;
    auto pb = spectral_problem(3, 0, n, L);
    auto spec = diagonalize(pb);
    REQUIRE(spec.interior() == n - 1);

    for (int k = 1; k < spec.interior(); ++k) CHECK(spec.values[k] >= spec.values[k - 1]);

    const double h = pb.grid.h;
    double lam_max = spec.max_abs_value();
    for (int k = 1; k <= n / 10; ++k) {
        const double exact_discrete = (2.0 - 2.0 * std::cos(k * kPi * h / L)) / (h * h);
        const double continuum = sqr(k * kPi / L);
        CHECK(std::abs(spec.values[k - 1] - exact_discrete) <= 1e-10 * lam_max);
        CHECK(std::abs(spec.values[k - 1] - continuum) <= sqr(sqr(k * kPi / L)) * h * h / 10.0);
    }

    // orthonormality and eigen-residual in the Liouville l2_h geometry
    for (int j = 0; j < 40; ++j) {
        for (int k = j; k < 40; ++k) {
            KahanSum dot;
            for (int i = 0; i < spec.interior(); ++i) dot.add(spec.vectors[j][i] * spec.vectors[k][i]);
            CHECK(std::abs(dot.value() * h - (j == k ? 1.0 : 0.0)) <= 1e-10);
        }
    }
    const double ih2 = 1.0 / (h * h);
    double worst = 0.0;
    for (int k = 0; k < spec.interior(); ++k) {
        const auto& phi = spec.vectors[k];
        KahanSum acc;
        for (int i = 0; i < spec.interior(); ++i) {
            double row = 2.0 * ih2 * phi[i];
            if (i > 0) row -= ih2 * phi[i - 1];
            if (i + 1 < spec.interior()) row -= ih2 * phi[i + 1];
            acc.add(sqr(row - spec.values[k] * phi[i]));
        }
        worst = std::max(worst, std::sqrt(acc.value() * h));
    }
    CHECK(worst <= 1e-9 * lam_max);
}

TEST_CASE("zero-eigenfunction counterexample potential") {
    // V = Delta u*/u* with u* = (1+r^2)^{-2}: H has an eigenvalue at 0, the
    // reason tau_0 = 0 has to stay excluded.
    const double lambda = -2.0;
    auto V = zero_mode_counterexample(3, lambda);
    CHECK(V.eval(1.0) == doctest::Approx(-12.0 * (1.0 - 1.0) / 4.0).epsilon(1e-12));

    double prev_res = -1.0, prev_lam = -1.0;
    for (int n : {800, 1600}) {
        auto pb = spectral_problem(3, 0, n, 30.0, {V});
        const auto& g = pb.grid;
        // discrete residual of the exact zero mode
        const double ih2 = 1.0 / (g.h * g.h);
        double worst = 0.0, vmax = 0.0;
        auto vstar = [&](int i) {
            const double r = g.r(i);
            return r * std::pow(1.0 + r * r, lambda);
        };
        for (int i = 0; i + 1 < g.n; ++i) vmax = std::max(vmax, std::abs(vstar(i)));
        for (int i = 1; i + 2 < g.n; ++i) {
            const double row = ih2 * (2.0 * vstar(i) - vstar(i - 1) - vstar(i + 1)) +
                               V.eval(g.r(i)) * vstar(i);
            worst = std::max(worst, std::abs(row) / vmax);
        }
        auto op = assemble_operator(pb);
        std::vector<double> diag(op.matrix.diag.size()), off(op.matrix.upper.size());
        for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = op.matrix.diag[i].real();
        for (std::size_t i = 0; i < off.size(); ++i) off[i] = op.matrix.upper[i].real();
        auto lams = symtri_eigenvalues(diag, off);
        double nearest = 1e300;
        for (double l : lams) nearest = std::min(nearest, std::abs(l));
        if (prev_res > 0.0) {
            CHECK(prev_res / worst >= 3.0);     // O(h^2) residual
            CHECK(prev_lam / nearest >= 3.0);   // spectrum point -> 0 at O(h^2)
        }
        prev_res = worst;
        prev_lam = nearest;
    }
    CHECK(prev_lam <= 1e-3);
}

TEST_CASE("spectral projection") {
    auto pb = spectral_problem(3, 0, 400, 20.0);
    auto spec = diagonalize(pb);
    auto u0 = gaussian_data(pb.grid, 6.0, 1.2);

    auto full = spectral_project(spec, -1e300, 1e300, u0);
    CHECK(mode_distance(full.u, u0) <= 1e-10);

    auto above = spectral_project(spec, spec.values.back() + 1.0, 1e300, u0);
    CHECK(above.empty);
    CHECK(liouville_norm_sq(above.u) == 0.0);

    auto half = spectral_project(spec, 0.0, 1.0, u0);
    auto twice = spectral_project(spec, 0.0, 1.0, half.u);
    CHECK(mode_distance(twice.u, half.u) <= 1e-10);

    // symmetry <Pu, v> = <u, Pv> in the l2_h pairing
    auto v0 = gaussian_data(pb.grid, 9.0, 2.0);
    auto Pv = spectral_project(spec, 0.0, 1.0, v0);
    auto uu = to_liouville(u0);
    auto vv = to_liouville(v0);
    auto Pu_l = to_liouville(half.u);
    auto Pv_l = to_liouville(Pv.u);
    complexd a{0, 0}, b{0, 0};
    for (int i = 0; i < pb.grid.n; ++i) {
        a += std::conj(Pu_l[i]) * vv[i];
        b += std::conj(uu[i]) * Pv_l[i];
    }
    CHECK(std::abs(a - b) * pb.grid.h <= 1e-10);

    // Parseval
    auto c = spectral_coefficients(spec, u0);
    KahanSum sum;
    for (auto& ck : c) sum.add(std::norm(ck));
    CHECK(sum.value() == doctest::Approx(liouville_norm_sq(u0)).epsilon(1e-12));
}

TEST_CASE("half derivative") {
    auto pb = spectral_problem(3, 0, 300, 15.0);
    auto spec = diagonalize(pb);
    REQUIRE(spec.is_free);

    // eigenvector maps to lambda^{1/4} eigenvector
    const int k = 5;
    ModeFunction phi(pb.grid);
    const double p = 0.5 * (pb.grid.d - 1.0);
    for (int i = 0; i + 1 < pb.grid.n; ++i)
        phi.values[i] = spec.vectors[k][i] * std::pow(pb.grid.r(i), -p);
    auto dphi = half_derivative(phi, spec);
    ModeFunction expected = phi;
    for (auto& x : expected.values) x *= std::pow(spec.values[k], 0.25);
    CHECK(mode_distance(dphi, expected) <= 1e-10);

    // composition: D^{1/2} twice equals the full square root
    auto u0 = gaussian_data(pb.grid, 5.0, 1.0);
    auto twice = half_derivative(half_derivative(u0, spec), spec);
    auto c = spectral_coefficients(spec, u0);
    auto direct = from_coefficients(spec, c, [&](int kk) {
        return complexd{std::sqrt(spec.values[kk]), 0.0};
    });
    CHECK(mode_distance(twice, direct) <= 1e-10);

    ModeFunction zero(pb.grid);
    CHECK(liouville_norm_sq(half_derivative(zero, spec)) == 0.0);

    auto vpot = spectral_problem(3, 0, 300, 15.0, {PotentialSpec::smooth_inverse_power(0.3, 1.0)});
    auto nonfree = diagonalize(vpot);
    CHECK_THROWS(half_derivative(u0, nonfree));

    // potential-adapted comparison norm: ||H^{1/4}u||^2 matches the diagonal
    // sum and dominates the free one for V >= 0
    const double adapted = v_adapted_quarter_norm_sq(nonfree, u0);
    const double free_q = v_adapted_quarter_norm_sq(spec, u0);
    CHECK(adapted >= free_q);
    auto du = half_derivative(u0, spec);
    CHECK(free_q == doctest::Approx(liouville_norm_sq(du)).epsilon(1e-10));
}

TEST_CASE("propagator") {
    auto pb = spectral_problem(3, 1, 300, 15.0,
                               {PotentialSpec::smooth_inverse_power(0.2, 2.0)});
    auto spec = diagonalize(pb);
    auto u0 = gaussian_data(pb.grid, 5.0, 1.0);

    CHECK(mode_distance(propagate(spec, u0, 0.0), u0) <= 1e-12);

    const double n0 = liouville_norm_sq(u0);
    for (double t : {0.3, 1.7, -2.4}) {
        CHECK(liouville_norm_sq(propagate(spec, u0, t)) == doctest::Approx(n0).epsilon(1e-10));
    }

    auto ab = propagate(spec, propagate(spec, u0, 0.7), 0.5);
    auto once = propagate(spec, u0, 1.2);
    CHECK(mode_distance(ab, once) <= 1e-9);

    // P_tau commutes with the propagator
    auto P_then_prop = propagate(spec, spectral_project(spec, 1.0, 1e300, u0).u, 0.9);
    auto prop_then_P = spectral_project(spec, 1.0, 1e300, propagate(spec, u0, 0.9)).u;
    CHECK(mode_distance(P_then_prop, prop_then_P) <= 1e-9);
}

TEST_CASE("windowed smoothing functional") {
    auto pb = spectral_problem(3, 0, 400, 40.0);
    auto spec = diagonalize(pb);
    auto u0 = gaussian_data(pb.grid, 10.0, 1.5);

    SmoothingConfig cfg;
    cfg.half_deriv = false;
    cfg.T = 0.05;

    ModeFunction zero(pb.grid);
    CHECK(smoothing_functional(spec, zero, cfg) == 0.0);

    // weight one: the propagator is unitary, value/2T is the constant L2 mass
    const double v1 = smoothing_functional(spec, u0, cfg) / (2.0 * cfg.T);
    cfg.T = 0.1;
    const double v2 = smoothing_functional(spec, u0, cfg) / (2.0 * cfg.T);
    CHECK(std::abs(v2 - v1) <= 0.05 * std::abs(v1));
    // the d-dimensional mass carries the sphere-area factor relative to l2_h
    CHECK(v1 == doctest::Approx(pb.grid.omega * liouville_norm_sq(u0)).epsilon(1e-3));

    cfg.T = 1e6;  // beyond the traversal guard
    CHECK_THROWS(smoothing_functional(spec, u0, cfg));

    cfg.T = 0.05;
    cfg.half_deriv = true;
    CHECK_THROWS(smoothing_functional(spec, u0, cfg));  // free spectrum missing
    cfg.free_spectrum = &spec;
    const double full = smoothing_functional(spec, u0, cfg);
    CHECK(full > 0.0);

    // band-limiting the datum can only lose mass
    cfg.project_hi = spec.values[spec.interior() / 4];
    const double banded = smoothing_functional(spec, u0, cfg);
    CHECK(banded > 0.0);
    CHECK(banded <= full * (1.0 + 1e-12));
}

TEST_CASE("CAP spectra have damped eigenvalues") {
    auto pb = spectral_problem(3, 0, 300, 30.0);
    pb.boundary = BoundaryKind::sponge;
    pb.sponge = {0.3, 1.0};
    auto spec = diagonalize(pb);
    REQUIRE(spec.complex_cap);
    for (const auto& l : spec.values_c) CHECK(l.imag() <= 1e-10);

    // eigen-residual of the complex-symmetric solver (CAP spectra fix the
    // H - i Gamma convention, i.e. the minus branch of the assembly)
    pb.sign = ResolventSign::minus;
    auto op = assemble_operator(pb);
    const int m = spec.interior();
    double worst = 0.0;
    for (int k = 0; k < m; k += 17) {
        const auto& phi = spec.vectors_c[k];
        double num = 0.0, den = 0.0;
        for (int i = 0; i < m; ++i) {
            complexd row = op.matrix.diag[i] * phi[i];
            if (i > 0) row += op.matrix.lower[i - 1] * phi[i - 1];
            if (i + 1 < m) row += op.matrix.upper[i] * phi[i + 1];
            num += std::norm(row - spec.values_c[k] * phi[i]);
            den += std::norm(phi[i]);
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    CHECK(worst <= 1e-7 * spec.max_abs_value());

    auto big = spectral_problem(3, 0, 2500, 30.0);
    big.boundary = BoundaryKind::sponge;
    CHECK_THROWS(diagonalize(big));
}
