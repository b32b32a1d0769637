#include <array>
#include <cmath>

#include "doctest.h"
#include "helmlab/multipliers.hpp"

using namespace helmlab;

namespace {

// 3-D finite-difference Hessian oracle for the scaled multiplier surface
double hessian_contraction_fd(double R, const std::array<double, 3>& x, const std::array<double, 3>& v) {
    auto F = [R](std::array<double, 3> p) {
        const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / R;
        return R * (std::sqrt(1.0 + r * r) + r);
    };
    const double delta = 2e-4;
    double acc = 0.0;
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            std::array<double, 3> pp = x, pm = x, mp = x, mm = x;
            pp[j] += delta; pp[k] += delta;
            pm[j] += delta; pm[k] -= delta;
            mp[j] -= delta; mp[k] += delta;
            mm[j] -= delta; mm[k] -= delta;
            const double Hjk = (F(pp) - F(pm) - F(mp) + F(mm)) / (4.0 * delta * delta);
            acc += v[j] * Hjk * v[k];
        }
    }
    return acc;
}

}  // namespace

TEST_CASE("morawetz profile closed forms and bounds") {
    auto g = RadialGrid::make(5, 0, 2000, 10.0);
    auto p = morawetz_profile(1.0, g);

    for (int i = 0; i < g.n; ++i) {
        CHECK(p.dPhi[i] >= 1.0);
        CHECK(p.dPhi[i] <= 2.0);
        const double rpp = g.r(i) * p.d2Phi[i];
        CHECK(rpp >= 0.0);
        CHECK(rpp <= 1.0);
        // radial calculus consistency Delta Phi = Phi'' + (d-1) Phi'/r
        CHECK(p.lapPhi[i] == doctest::Approx(p.d2Phi[i] + 4.0 * p.dPhi[i] / g.r(i)).epsilon(1e-14));
    }
    // limits Phi'(0+) = 1 and Phi'(r) -> 2
    CHECK(p.dPhi.front() == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(p.dPhi.back() == doctest::Approx(2.0).epsilon(1e-2));

    // d=5, r=1: Delta^2 Phi = -(8/2^1.5 + 12/2^2.5 + 15/2^3.5 + 8)
    const double expected = -(8.0 / std::pow(2.0, 1.5) + 12.0 / std::pow(2.0, 2.5) +
                              15.0 / std::pow(2.0, 3.5) + 8.0);
    const int i1 = g.nearest_node(1.0);
    CHECK(g.r(i1) == doctest::Approx(1.0));
    CHECK(p.bilapPhi[i1] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(-14.2756).epsilon(1e-4));
}

TEST_CASE("morawetz sign bounds of the proofs") {
    const double lower_mc4 = 1.0 / (2.0 * std::sqrt(2.0));
    for (int d : {4, 5, 6}) {
        auto g = RadialGrid::make(d, 0, 1500, 6.0);
        auto p = morawetz_profile(1.0, g);
        const double c = d * (d + 2.0) / (8.0 * std::sqrt(2.0));
        for (int i = 0; i < g.n; ++i) {
            const double r = g.r(i);
            const double rhs = (r <= 1.0 ? c : 0.0) + (d - 1.0) * (d - 3.0) / (r * r * r);
            CHECK(-p.bilapPhi[i] >= rhs - 1e-12);
            if (r <= 1.0) {
                CHECK(p.d2Phi[i] >= lower_mc4 - 1e-14);
                CHECK((p.dPhi[i] - 1.0) / r >= lower_mc4 - 1e-14);
            }
        }
    }
}

TEST_CASE("morawetz scaling law") {
    auto g1 = RadialGrid::make(4, 0, 400, 4.0);
    auto gR = RadialGrid::make(4, 0, 400, 8.0);  // node i of gR at twice the radius
    auto p1 = morawetz_profile(1.0, g1);
    auto pR = morawetz_profile(2.0, gR);
    for (int i = 0; i < 400; ++i) {
        CHECK(std::abs(pR.dPhi[i] - p1.dPhi[i]) <= 1e-12);
        CHECK(std::abs(pR.d2Phi[i] - p1.d2Phi[i] / 2.0) <= 1e-12);
        CHECK(std::abs(pR.bilapPhi[i] - p1.bilapPhi[i] / 8.0) <= 1e-12);
    }
}

TEST_CASE("piecewise profile") {
    auto g = RadialGrid::make(3, 0, 1000, 10.0);
    auto p = piecewise_profile(2.0, g);
    CHECK(p.snap_distance <= 0.5 * g.h);

    const int m = g.nearest_node(p.R);
    for (int i = 0; i < g.n; ++i) {
        CHECK(std::abs(p.dPhi[i]) <= 1.0 + 1e-15);
        if (i == m) continue;  // interface node carries midpoint values
        const double r = g.r(i);
        if (r < p.R) {
            CHECK(p.lapPhi[i] == doctest::Approx(1.5));
            CHECK(p.phi_R[i] == doctest::Approx(0.25));
        } else {
            CHECK(p.phi_R[i] == 0.0);
            CHECK(p.lapPhi[i] == doctest::Approx(2.0 / r));
        }
    }
    REQUIRE(p.lap_combo_atoms.size() == 1);
    CHECK(p.lap_combo_atoms[0].r == doctest::Approx(2.0));
    CHECK(p.lap_combo_atoms[0].mass == doctest::Approx(0.5));  // (d-1)/R^2

    CHECK_THROWS(piecewise_profile(0.001, g));
}

TEST_CASE("psi weight and its bracketing") {
    auto g = RadialGrid::make(3, 0, 2000, 40.0);
    CHECK(psi_R_eval(4.0, 0.0) == doctest::Approx(0.25));
    auto p = psi_weight(4.0, g);
    auto b = psi_bracketing(p);
    CHECK(b.below_invR);
    CHECK(b.below_R_over_r2);
    CHECK(b.below_inv_r);
    CHECK(b.above_half_indicator);
}

TEST_CASE("A2 products: R-independence surrogate") {
    // constant weight: product identically 1
    CHECK(a2_product_numeric([](double) { return 3.7; }, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

    const double rmax = 100.0;
    SplitMix64 rng(91);
    std::vector<std::pair<double, double>> intervals;
    for (int k = 0; k < 200; ++k) {
        const double center = std::exp(rng.uniform(std::log(0.3), std::log(10.0)));
        const double halfwidth = center * rng.uniform(0.05, 0.45);
        intervals.emplace_back(center, halfwidth);
    }
    auto rep = check_A2({1.0, 8.0, 64.0}, intervals, rmax);
    CHECK(rep.min_over_R >= 1.0 - 1e-12);
    CHECK(rep.max_over_R / rep.min_over_R <= 2.0);

    // degenerate interval: single-point averages, product -> 1
    auto tiny = check_A2({1.0, 8.0}, {{2.0, 1e-4}}, rmax);
    CHECK(tiny.max_over_R == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(check_A2({1.0}, {}, rmax), std::domain_error);
}

TEST_CASE("appendix-2 constructor, h == 0 closed forms") {
    auto g = RadialGrid::make(3, 0, 4000, 160.0);
    const double eps = 0.6, R = 1.0, alpha = 0.1, kappa = 0.4;
    auto p = appendix2_construct(HProfile::zero(), eps, R, alpha, kappa, g);

    // phi'(rmax) -> eps/6 (the nested integral gives eps/15 inside + eps/10 tail)
    const double phi1_end = p.dPhi.back() - alpha;  // psi' == alpha when h == 0
    CHECK(std::abs(phi1_end - eps / 6.0) < 1e-6);

    double minC = 1e300;
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r(i);
        const double phi1 = p.dPhi[i] - alpha;
        CHECK(phi1 <= eps / 6.0 + 1e-15);
        CHECK(p.dPhi[i] > alpha);
        CHECK(p.dPhi[i] < kappa);
        CHECK(p.d2Phi[i] >= 0.0);
        if (r < R) minC = std::min(minC, std::min(p.dPhi[i] / r, p.d2Phi[i]) * R / eps);
    }
    CHECK(p.measured_C == doctest::Approx(minC));
    CHECK(p.measured_C >= 1.0 / 15.0 - 1e-12);

    // hypothesis refusal carries the violated margin
    CHECK_THROWS_AS(appendix2_construct(HProfile::zero(), 0.6, 1.0, 0.4, 0.45, g), std::runtime_error);
}

TEST_CASE("appendix-2 constructor with a nonzero h profile") {
    auto g = RadialGrid::make(3, 0, 4000, 160.0);
    auto hp = HProfile::rational(0.05, 3.0);
    auto p = appendix2_construct(hp, 0.6, 1.0, 0.1, 0.4, g);
    CHECK(p.moment_th == doctest::Approx(0.025).epsilon(1e-3));
    for (int i = 0; i < g.n; ++i) {
        CHECK(p.dPhi[i] > 0.1);
        CHECK(p.dPhi[i] < 0.4);
        CHECK(p.d2Phi[i] >= -1e-14);
    }
    CHECK(p.measured_C > 0.0);
}

TEST_CASE("quadratic form density against the Hessian oracle") {
    auto g = RadialGrid::make(3, 0, 2000, 6.0);
    auto p = morawetz_profile(1.0, g);

    // constant l = 0 mode: density vanishes
    auto c = ModeFunction::from_real_profile(g, [](double) { return 1.0; });
    auto dens = quadratic_form_density(p, c);
    for (int i = 5; i < g.n - 5; ++i) CHECK(std::abs(dens[i]) < 1e-18);

    auto gauss = ModeFunction::from_real_profile(g, [](double r) { return std::exp(-r * r); });
    dens = quadratic_form_density(p, gauss);
    for (int i = 10; i < g.n - 10; ++i) {
        const double r = g.r(i);
        const double exact = detail::morawetz_d2phi(r) * 4.0 * r * r * std::exp(-2.0 * r * r);
        CHECK(dens[i] == doctest::Approx(exact).epsilon(1e-6));
    }

    // pointwise formula vs 3-D Hessian contraction at off-axis points
    SplitMix64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const double r = rng.uniform(0.5, 3.0);
        const double th = rng.uniform(0.2, 1.3), ph = rng.uniform(0.2, 6.0);
        const std::array<double, 3> x{r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph),
                                      r * std::cos(th)};
        std::array<double, 3> er{x[0] / r, x[1] / r, x[2] / r};
        // tangential direction orthogonal to er
        std::array<double, 3> et{-x[1], x[0], 0.0};
        const double nt = std::sqrt(et[0] * et[0] + et[1] * et[1]);
        et = {et[0] / nt, et[1] / nt, 0.0};
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
        const std::array<double, 3> v{a * er[0] + b * et[0], a * er[1] + b * et[1], a * er[2] + b * et[2]};
        const double R = 1.0;
        const double form = hessian_contraction_fd(R, x, v);
        const double predicted = detail::morawetz_d2phi(r / R) / R * a * a +
                                 detail::morawetz_dphi(r / R) / r * b * b;
        CHECK(form == doctest::Approx(predicted).epsilon(1e-4));
    }
}

TEST_CASE("bilaplacian reconstruction residuals") {
    // constant Phi': zero bilaplacian against a zero target
    auto g = RadialGrid::make(3, 0, 1000, 10.0);
    MultiplierProfile flat;
    flat.grid = g;
    flat.dPhi.assign(g.n, 0.3);
    CHECK(bilaplacian_residual(flat, std::vector<double>(g.n, 0.0)) == 0.0);

    // appendix-2 profile vs its target
    auto gfine = RadialGrid::make(3, 0, 4000, 8.0);
    auto p2 = appendix2_construct(HProfile::zero(), 0.6, 1.0, 0.1, 0.4, gfine);
    CHECK(bilaplacian_residual(p2, p2.bilapPhi) <= 1e-4);

    // morawetz profile vs the closed form: refinement is second order
    double prev = -1.0;
    for (int n : {500, 1000, 2000}) {
        auto gm = RadialGrid::make(5, 0, n, 6.0);
        auto pm = morawetz_profile(1.0, gm);
        const double res = bilaplacian_residual(pm, pm.bilapPhi, 0.3, 5.0);
        if (prev > 0.0) CHECK(prev / res >= 3.5);
        prev = res;
    }

    MultiplierProfile small;
    small.grid = g;
    CHECK_THROWS(bilaplacian_residual(small, std::vector<double>(g.n, 0.0)));
}
