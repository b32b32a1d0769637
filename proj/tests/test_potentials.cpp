#include <cmath>

#include "doctest.h"
#include "helmlab/potentials.hpp"

using namespace helmlab;

TEST_CASE("eval_potential basics") {
    auto zero = PotentialSpec::zero_potential();
    CHECK(zero.eval(1.0) == 0.0);
    CHECK_THROWS_AS(zero.eval(0.0), std::domain_error);

    auto ip = PotentialSpec::inverse_power(0.5, 2.0);
    CHECK(ip.eval(2.0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(ip.eval_deriv(2.0) == doctest::Approx(-2.0 * 0.5 / 8.0).epsilon(1e-14));
    CHECK_THROWS(PotentialSpec::inverse_power(1.0, 0.0));

    // exp_well decays to zero and |w| <= mu (1 - e^{-int g'}) by quadrature
    auto well = PotentialSpec::exp_well(1.0, 0.1, 2.0);
    CHECK(std::abs(well.eval(1e6)) < 1e-6);
    // Simpson oracle for G(r) = int_r^inf b/(1+s)^2 ds (exact tail beyond hi)
    auto G = [](double r) {
        const int N = 20000;  // panels
        const double hi = 50.0;
        const double dh = (hi - r) / (2 * N);
        double acc = 0.0;
        for (int i = 0; i <= 2 * N; ++i) {
            const double s = r + dh * i;
            const double coef = (i == 0 || i == 2 * N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += coef * 0.1 / sqr(1.0 + s);
        }
        return acc * dh / 3.0 + 0.1 / (1.0 + hi);
    };
    for (double r : {0.5, 1.0, 4.0}) {
        const double bound = 1.0 * (1.0 - std::exp(-G(r)));
        CHECK(std::abs(well.eval(r)) <= bound * (1.0 + 1e-6));
        CHECK(std::abs(well.eval(r)) == doctest::Approx(bound).epsilon(1e-5));
    }

    // manufactured derivative consistent with profile at O(h^2)
    auto man = PotentialSpec::manufactured([](double r) { return std::exp(-r); },
                                           [](double r) { return -std::exp(-r); });
    const double h = 1e-4;
    const double fd = (man.eval(1.0 + h) - man.eval(1.0 - h)) / (2 * h);
    CHECK(fd == doctest::Approx(man.eval_deriv(1.0)).epsilon(1e-7));
}

TEST_CASE("check_repulsive branches") {
    auto g5 = RadialGrid::make(5, 0, 800, 20.0);
    auto zero = PotentialSpec::zero_potential();
    auto rep = check_repulsive(zero, 5, 1.0, g5);
    CHECK(rep.pass);
    CHECK(rep.eta == doctest::Approx(1.0));

    auto ip = PotentialSpec::inverse_power(0.1, 2.0);
    rep = check_repulsive(ip, 5, 1.0, g5);  // gamma V + r V' = -c/r^2 <= 0
    CHECK(rep.pass);
    CHECK(rep.eta > 0.999);

    // homogeneous case in d = 3: gamma matching the exponent gives W == 0
    auto g3 = RadialGrid::make(3, 0, 800, 20.0);
    auto hom = PotentialSpec::inverse_power(0.3, 1.5);
    rep = check_repulsive(hom, 3, 1.5, g3);
    CHECK(rep.pass);
    CHECK(rep.tW_total() < 1e-10);

    // gamma > exponent leaves a positive envelope with a finite moment only
    // when the decay is faster than 2
    auto slow = PotentialSpec::inverse_power(0.05, 1.0);
    rep = check_repulsive(slow, 3, 2.0, g3);
    CHECK(!rep.pass);
    CHECK(std::isinf(rep.tW_tail));

    auto neg = PotentialSpec::manufactured([](double r) { return r < 1.0 ? -0.1 : 0.0; },
                                           [](double) { return 0.0; });
    rep = check_repulsive(neg, 5, 1.0, g5);
    CHECK(!rep.nonneg_ok);
    CHECK(!rep.pass);
    CHECK(rep.first_negative_node >= 0);
}

TEST_CASE("check_repulsive monotone under pointwise-smaller potentials") {
    auto g = RadialGrid::make(5, 0, 400, 10.0);
    auto V = PotentialSpec::smooth_inverse_power(0.4, 1.0);
    auto half = V.scaled(0.5);
    auto r1 = check_repulsive(V, 5, 1.0, g);
    auto r2 = check_repulsive(half, 5, 1.0, g);
    REQUIRE(r1.pass);
    CHECK(r2.pass);
    CHECK(r2.eta >= r1.eta);
}

TEST_CASE("compute_beta_rho") {
    auto g = RadialGrid::make(5, 0, 2000, 64.0);
    auto flat = PotentialSpec::manufactured([](double) { return -2.0; }, [](double) { return 0.0; },
                                            PotentialRole::n_attractive);
    auto rep = compute_beta_rho(flat, 1.0, g);
    CHECK(rep.beta == 0.0);
    CHECK(rep.pass);
    CHECK(rep.j0 == -1);

    auto n = PotentialSpec::exp_well(1.0, 0.1, 2.0, -1.0);
    rep = compute_beta_rho(n, 1.0, g);
    CHECK(rep.beta > 0.0);
    CHECK(rep.tail_known);

    // scale invariance n -> mu n
    for (double mu : {0.5, 2.0}) {
        auto repm = compute_beta_rho(n.scaled(mu), 1.0, g);
        CHECK(repm.beta == rep.beta);  // binary scales are exact
    }
    auto rep10 = compute_beta_rho(n.scaled(10.0), 1.0, g);
    CHECK(rep10.beta == doctest::Approx(rep.beta).epsilon(1e-13));

    // beta decreases monotonically with b and vanishes as b -> 0
    double prev = rep.beta;
    for (double b : {0.05, 0.01, 0.001}) {
        auto small = PotentialSpec::exp_well(1.0, b, 2.0, -1.0);
        const double beta = compute_beta_rho(small, 1.0, g).beta;
        CHECK(beta < prev);
        prev = beta;
    }
    CHECK(prev < 5e-3);

    // brute-force oracle: 10x denser sampling changes beta only marginally
    auto gf = RadialGrid::make(5, 0, 20000, 64.0);
    auto repf = compute_beta_rho(n, 1.0, gf);
    CHECK(repf.beta == doctest::Approx(rep.beta).epsilon(1e-3));

    auto bad = PotentialSpec::manufactured([](double r) { return r - 2.0; }, [](double) { return 1.0; },
                                           PotentialRole::n_attractive);
    CHECK_THROWS_AS(compute_beta_rho(bad, 1.0, g), std::domain_error);
}

TEST_CASE("attached split surfaces its Hardy constant in the attraction report") {
    auto g = RadialGrid::make(3, 0, 800, 32.0);
    auto n = PotentialSpec::exp_well(1.0, 0.05, 2.0, -1.0);
    n.split_n1_bound = 1.0;
    n.split_n2 = std::make_shared<PotentialSpec>(
        PotentialSpec::inverse_power(0.1, 2.0, PotentialRole::n_attractive));
    auto rep = compute_beta_rho(n, 1.0, g);
    CHECK(rep.hardy_c1 == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("long-range constant is attained within 1% at some node") {
    auto g = RadialGrid::make(3, 0, 2000, 40.0);
    auto v1 = PotentialSpec::exp_well(1.0, 0.3, 2.0, 0.0, PotentialRole::V1_long_range);
    auto rep = check_long_range(v1, PotentialSpec::zero_potential(), 1.0, g, 3);
    REQUIRE(std::isfinite(rep.a));
    double best = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r(i);
        best = std::max(best, std::abs(v1.eval(r)) * (1.0 + r));
        best = std::max(best, std::max(0.0, v1.eval_deriv(r)) * sqr(1.0 + r));
    }
    CHECK(best >= 0.99 * rep.a);
    CHECK(best <= rep.a * (1.0 + 1e-12));
}

TEST_CASE("check_sobolev_split Hardy criterion") {
    auto g = RadialGrid::make(3, 0, 500, 20.0);
    auto zero = PotentialSpec::zero_potential();
    auto res = check_sobolev_split(0.5, zero, 3, g);
    CHECK(res.c1 == 0.0);
    CHECK(res.pass);

    auto n2a = PotentialSpec::inverse_power(0.1, 2.0, PotentialRole::n_attractive);
    res = check_sobolev_split(0.5, n2a, 3, g);
    CHECK(res.c1 == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(res.pass);

    auto n2b = PotentialSpec::inverse_power(0.5, 2.0, PotentialRole::n_attractive);
    res = check_sobolev_split(0.5, n2b, 3, g);
    CHECK(res.c1 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(!res.pass);

    auto undominated = PotentialSpec::manufactured([](double) { return -0.1; }, [](double) { return 0.0; });
    CHECK_THROWS(check_sobolev_split(0.5, undominated, 3, g));
}

TEST_CASE("check_long_range constants") {
    auto g = RadialGrid::make(3, 0, 4000, 40.0);
    auto zero = PotentialSpec::zero_potential();
    auto rep = check_long_range(zero, zero, 1.0, g, 3);
    CHECK(rep.a == 0.0);

    auto v1 = PotentialSpec::manufactured([](double r) { return 1.0 / sqr(1.0 + r); },
                                          [](double r) { return -2.0 / std::pow(1.0 + r, 3.0); },
                                          PotentialRole::V1_long_range, 2.0);
    rep = check_long_range(v1, zero, 2.0, g, 3);
    CHECK(rep.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.a3 == 0.0);  // dV1 < 0 never binds

    // grid refinement leaves a stable (the sup sits at a fixed radius)
    auto g2 = RadialGrid::make(3, 0, 8000, 40.0);
    auto rep2 = check_long_range(v1, zero, 2.0, g2, 3);
    CHECK(rep2.a == doctest::Approx(rep.a).epsilon(1e-2));

    // omega example with g' = c/(1+r)^2 admits a finite constant at gamma = 1
    auto omega = PotentialSpec::exp_well(1.0, 0.3, 2.0, 0.0, PotentialRole::V1_long_range);
    rep = check_long_range(omega, zero, 1.0, g, 3);
    CHECK(std::isfinite(rep.a));
    CHECK(rep.a > 0.0);

    // unbounded ratio near the origin is flagged
    auto sing = PotentialSpec::inverse_power(1.0, 1.0, PotentialRole::V1_long_range);
    rep = check_long_range(sing, zero, 1.0, g, 3);
    CHECK(std::isinf(rep.a));
    CHECK(rep.failing_condition == 1);
}

TEST_CASE("compute_B_tau0") {
    CHECK(compute_B_tau0(0.0, 3, 1.0, 1.0) == 0.0);
    CHECK(compute_B_tau0(0.1, 3, 1.0, 1.0) == doctest::Approx(38.52).epsilon(1e-14));
    CHECK_THROWS_AS(compute_B_tau0(0.1, 3, 0.0, 1.0), std::domain_error);

    // max{1, 1/tau0 - 1} = 1 at tau0 = 1 reproduces the B(1) shape
    const double F = 2.0;  // F(1)
    const double expected = 16.0 * 0.1 * 8.0 * (1.0 + F) + 0.1 * 1.2;
    CHECK(compute_B_tau0(0.1, 3, 1.0, 1.0) == doctest::Approx(expected).epsilon(1e-14));

    // nondecreasing in a, nonincreasing in tau0 on (0,1]
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double a = 0.05 * (i + 1), tau0 = 0.1 * (j + 1);
            const double B = compute_B_tau0(a, 4, 1.5, tau0);
            if (i + 1 < 10) CHECK(compute_B_tau0(a + 0.05, 4, 1.5, tau0) >= B);
            if (j + 1 < 10) CHECK(compute_B_tau0(a, 4, 1.5, tau0 + 0.1) <= B + 1e-12);
        }
    }
}
