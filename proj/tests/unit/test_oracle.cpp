#include "support.hpp"

#include "wavekernel/errors.hpp"
#include "wavekernel/goursat_kernel.hpp"
#include "wavekernel/oracle.hpp"
#include "wavekernel/propagator.hpp"

#include <doctest.h>

#include <cmath>

using namespace wavekernel;

namespace {

Vector ones(std::size_t n) { return Vector::Ones(static_cast<Eigen::Index>(n)); }

}  // namespace

TEST_CASE("unit CFL leapfrog is exact for the free wave") {
    const PotentialGrid p = PotentialGrid::zero(1, 1.0, 0.01);
    const Control f = Control::bump(1.0, 0.1, 0.9, ones(1));
    FDConfig cfg;
    cfg.N_x = 128;
    const WaveSnapshot s = fd_solve(p, f, cfg);
    REQUIRE(s.intervals() == 128);
    for (std::size_t i = 0; i <= 128; ++i) CHECK(std::abs(s.u(0, i) - f(1.0 - s.x[i]).f(0)) <= 1e-12);

    const WaveSnapshot z = fd_solve(PotentialGrid::preset("unit", 1.0, 0.01), Control::zero(1, 1.0), cfg);
    CHECK(z.u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the discrete front never outruns the characteristic") {
    const PotentialGrid p = PotentialGrid::preset("coupled2", 1.0, 0.01);
    const double start = 0.2;
    const Control f = Control::bump(1.0, start, 0.9, ones(2));
    FDConfig cfg;
    cfg.N_x = 100;
    bool ok = true;
    cfg.observer = [&](std::size_t, double t, const Eigen::MatrixXcd& u) {
        const double dx = 1.0 / 100;
        for (Eigen::Index i = 0; i < u.cols(); ++i)
            if (dx * static_cast<double>(i) > t - start + 1e-12 && u.col(i).cwiseAbs().maxCoeff() != 0.0) ok = false;
    };
    fd_solve(p, f, cfg);
    CHECK(ok);
    cfg.cfl = 1.5;
    CHECK_THROWS_AS(fd_solve(p, f, cfg), InputError);
}

TEST_CASE("Bessel closed form") {
    CHECK(bessel_j1(2.3) == doctest::Approx(std::cyl_bessel_j(1.0, 2.3)).epsilon(1e-14));
    CHECK(bessel_j1(0.0) == 0.0);
    for (double c : {0.5, 2.0}) {
        for (double x : {0.2, 0.8}) CHECK(bessel_kernel_constant(c, x, x) == doctest::Approx(-c * x / 2).epsilon(1e-15));
        CHECK(bessel_kernel_constant(c, 0.0, 0.7) == 0.0);
        CHECK(bessel_kernel_constant(c, 0.3, 0.9) == doctest::Approx(testing::bessel_reference(c, 0.3, 0.9)).epsilon(1e-13));
        for (auto [xi, eta] : {std::pair{0.2, 1.1}, {0.0, 0.5}, {0.9, 1.8}})
            CHECK(bessel_substitution_residual(c, xi, eta) <= 1e-8);
    }
}

TEST_CASE("compare") {
    const PotentialGrid p = PotentialGrid::preset("unit", 1.0, 0.005);
    const KernelField field = solve_goursat(p, 1.0, 0.01, 1e-12);
    const Control f = Control::bump(1.0, 0.1, 0.9, ones(1));
    const WaveSnapshot a = propagate(p, field, f, 1.0, 100);
    const Comparison same = compare(a, a);
    CHECK(same.l2 == 0.0);
    CHECK(same.max == 0.0);
    WaveSnapshot b = a;
    b.u.array() += 1e-3;
    const Comparison shifted = compare(b, a);
    CHECK(shifted.max == doctest::Approx(1e-3).epsilon(1e-9));
    CHECK(shifted.l2 == doctest::Approx(1e-3).epsilon(1e-6));
    const WaveSnapshot c = propagate(p, field, f, 0.5, 50);
    CHECK_THROWS_AS(compare(a, c), InputError);
}

TEST_CASE("kernel solution and leapfrog converge to each other at second order") {
    const PotentialGrid p = PotentialGrid::preset("cosine", 2.0, 0.0025);
    const Control f = Control::bump(1.0, 0.05, 0.95, ones(1));
    const KernelField field = solve_goursat(p, 1.0, 0.0025, 1e-12);
    const WaveSnapshot ref = propagate(p, field, f, 1.0, 800);
    double prev = 0.0;
    for (std::size_t n : {50, 100, 200}) {
        FDConfig cfg;
        cfg.N_x = n;
        const double e = compare(fd_solve(p, f, cfg), ref).l2;
        if (prev > 0.0) CHECK(std::log2(prev / e) >= 1.8);
        prev = e;
    }
}
