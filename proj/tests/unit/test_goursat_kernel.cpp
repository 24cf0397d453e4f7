#include "support.hpp"

#include "wavekernel/errors.hpp"
#include "wavekernel/goursat_kernel.hpp"

#include <doctest.h>

#include <cmath>

using namespace wavekernel;
using testing::scalar;

namespace {

double max_node_distance(const KernelField& a, const KernelField& b, const Matrix& u) {
    double worst = 0.0;
    const std::size_t m = a.lattice_size();
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j)
            worst = std::max(worst, op_norm(a.v().matrix(i, j) - u * b.v().matrix(i, j) * u.adjoint()));
    return worst;
}

}  // namespace

TEST_CASE("initial_v0 closed forms") {
    const PotentialGrid z = PotentialGrid::zero(1, 1.0, 0.01);
    const KernelField f0 = initial_v0(z, 1.0, 0.02);
    CHECK(testing::max_abs(f0.v().matrix(3, 40)) == 0.0);
    CHECK(f0.iterations() == 0);

    const double c = 1.7;
    const PotentialGrid p = PotentialGrid::constant(scalar(c), 1.0, 0.01);
    const KernelField f = initial_v0(p, 1.0, 0.02);
    for (auto [i, j] : {std::pair{0, 0}, {0, 100}, {13, 57}, {99, 100}}) {
        const double xi = 0.02 * i, eta = 0.02 * j;
        CHECK(f.v().matrix(i, j)(0, 0).real() == doctest::Approx(-c * (eta - xi) / 4).epsilon(1e-12));
    }

    const PotentialGrid d = PotentialGrid::constant(testing::diag2(1.0, 2.0), 1.0, 0.01);
    const KernelField fd = initial_v0(d, 1.0, 0.02);
    const Matrix v = fd.v().matrix(10, 60);
    CHECK(v(0, 0).real() == doctest::Approx(-(1.2 - 0.2) / 4).epsilon(1e-12));
    CHECK(v(1, 1).real() == doctest::Approx(-(1.2 - 0.2) / 2).epsilon(1e-12));
    CHECK(std::abs(v(0, 1)) == 0.0);
}

TEST_CASE("apply_V on the explicit part of a constant potential") {
    const double c = 1.3;
    for (double h : {0.05, 0.025}) {
        const PotentialGrid p = PotentialGrid::constant(scalar(c), 1.0, h / 2);
        const KernelField f = initial_v0(p, 1.0, h);
        const TriangleField vv = apply_V(p, f.v(), h);
        double err = 0.0;
        const std::size_t m = vv.size();
        for (std::size_t i = 0; i <= m; ++i)
            for (std::size_t j = i; j <= m; ++j) {
                const double xi = h * i, eta = h * j;
                const double exact = c * c * (eta * eta * eta - xi * xi * xi - std::pow(eta - xi, 3)) / 96.0;
                err = std::max(err, std::abs(vv.matrix(i, j)(0, 0) - exact));
            }
        // the integrand is linear in each variable, so the trapezoid sums are exact
        CHECK(err <= 1e-14);
        for (std::size_t j = 0; j <= m; ++j) CHECK(testing::max_abs(vv.matrix(0, j)) == 0.0);
    }
    const PotentialGrid p = PotentialGrid::preset("coupled2", 1.0, 0.01);
    const TriangleField zero(100, 2);
    CHECK(max_distance(apply_V(p, zero, 0.02), zero) == 0.0);
}

TEST_CASE("zero potential converges in one sweep to zero") {
    const PotentialGrid p = PotentialGrid::zero(2, 1.0, 0.01);
    const KernelField f = solve_goursat(p, 1.0, 0.02, 1e-10);
    CHECK(f.iterations() == 1);
    CHECK(max_distance(f.v(), TriangleField(f.lattice_size(), 2)) == 0.0);
    const KernelConstants kc = kernel_constants(p, f);
    CHECK(kc.b1 == 0.0);
    CHECK(kc.b2 == 0.0);
    CHECK(kc.b3 == 0.0);
    CHECK(kc.b4 == 0.0);
    const GoursatResiduals r = check_goursat(p, f);
    CHECK(r.diagonal == 0.0);
    CHECK(r.edge == 0.0);
    CHECK(r.interior == 0.0);
    CHECK(testing::max_abs(wtilde_x(p, f, 0.3, 0.8)) == 0.0);
    CHECK(testing::max_abs(wtt_explicit(p, f, 0.3, 0.8)) == 0.0);
    const KernelSplit s = split_w(p, f, 0.2, 0.9);
    CHECK(testing::max_abs(s.w0) == 0.0);
    CHECK(testing::max_abs(s.wt) == 0.0);
    const CharacteristicDerivatives d = derivatives_v(p, f, 0.4, 1.1);
    CHECK(testing::max_abs(d.v_xi) == 0.0);
    CHECK(testing::max_abs(d.v_eta) == 0.0);
}

TEST_CASE("constant potentials match the Bessel kernel to O(h^2)") {
    const double tol = 1e-10;
    for (double c : {0.5, 1.0, 4.0}) {
        const double h = 1.0 / 100;
        const PotentialGrid p = PotentialGrid::constant(scalar(c), 1.0, h / 2);
        const KernelField f = solve_goursat(p, 1.0, h, tol);
        double err = 0.0;
        for (int ib = 0; ib <= 100; ib += 2)
            for (int ia = 0; ia <= ib; ia += 2) {
                const double x = 0.01 * ia, t = 0.01 * ib;
                err = std::max(err, std::abs(kernel_w(f, x, t)(0, 0) - testing::bessel_reference(c, x, t)));
            }
        CHECK(err <= std::max(5 * tol, 10 * h * h));
        const double z = std::sqrt(0.75 * c);
        CHECK(kernel_w(f, 0.5, 1.0)(0, 0).real() ==
              doctest::Approx(-c * 0.5 * std::cyl_bessel_j(1.0, z) / z).epsilon(10 * h * h));
    }
}

TEST_CASE("boundary values of w") {
    const PotentialGrid p = PotentialGrid::preset("coupled2", 1.0, 0.005);
    const KernelField f = solve_goursat(p, 1.0, 0.01, 1e-11);
    for (double t : {0.0, 0.3, 1.0}) CHECK(testing::max_abs(kernel_w(f, 0.0, t)) == 0.0);
    for (double x : {0.2, 0.55, 1.0}) {
        const Matrix exact = -0.5 * ((*p.exact_antiderivative())(x) - (*p.exact_antiderivative())(0.0));
        CHECK(op_norm(kernel_w(f, x, x) - exact) <= 1e-4);
        CHECK(testing::max_abs(split_w(p, f, x, x).wt) <= 1e-12);
    }
    CHECK_THROWS_AS(kernel_w(f, 0.6, 0.5), DomainError);
    CHECK_THROWS_AS(kernel_w(f, 0.5, 1.2), DomainError);
}

TEST_CASE("split of a constant potential") {
    const double c = 2.0;
    const PotentialGrid p = PotentialGrid::constant(scalar(c), 1.0, 0.01);
    const KernelField f = solve_goursat(p, 1.0, 0.02, 1e-10);
    for (auto [x, t] : {std::pair{0.1, 0.9}, {0.5, 0.5}, {0.3, 1.0}}) {
        const KernelSplit s = split_w(p, f, x, t);
        CHECK(s.w0(0, 0).real() == doctest::Approx(-c * x / 2).epsilon(1e-12));
        CHECK(testing::max_abs(s.w0 + s.wt - kernel_w(f, x, t)) <= 1e-15);
    }
}

TEST_CASE("a priori bound holds with zero violations") {
    for (const char* name : {"unit", "cosine", "coupled2", "hermitian2"}) {
        const PotentialGrid p = PotentialGrid::preset(name, 1.0, 0.005);
        const KernelField f = solve_goursat(p, 1.0, 0.01, 1e-10);
        CHECK(apriori_bound_excess(p, f) <= 0.0);
    }
}

TEST_CASE("Goursat residuals") {
    const PotentialGrid p = PotentialGrid::preset("unit", 1.0, 1.0 / 400);
    const KernelField f = solve_goursat(p, 1.0, 1.0 / 200, 1e-10);
    const GoursatResiduals r = check_goursat(p, f);
    CHECK(r.diagonal == 0.0);
    CHECK(r.edge <= 1e-13);
    CHECK(r.interior <= 1.0 / 200);

    double prev = 0.0;
    for (double h : {0.02, 0.01, 0.005}) {
        const PotentialGrid c = PotentialGrid::preset("cosine", 1.0, h / 2);
        const KernelField fc = solve_goursat(c, 1.0, h, 1e-11);
        const GoursatResiduals rc = check_goursat(c, fc);
        CHECK(rc.diagonal == 0.0);
        if (prev > 0.0) CHECK(std::log2(prev / rc.edge) >= 1.8);
        prev = rc.edge;
    }
}

TEST_CASE("Picard changes are dominated by the factorial tail") {
    const PotentialGrid p = PotentialGrid::preset("unit", 1.0, 0.005);
    const KernelField f = solve_goursat(p, 1.0, 0.01, 1e-13);
    const double S = p.majorant(2.0);
    const double L = 2.0;
    const auto& hist = f.change_history();
    REQUIRE(hist.size() >= 3);
    double term = S;  // S^{k+1} L^k / k!
    for (std::size_t k = 1; k <= hist.size(); ++k) {
        term *= S * L / static_cast<double>(k);
        CHECK(hist[k - 1] <= term * (1.0 + 1e-6) + 1e-14);
    }
    CHECK(f.tail_bound() == doctest::Approx(picard_tail(S, L, f.iterations())));
    CHECK(picard_tail(0.0, 2.0, 3) == 0.0);
    CHECK(picard_tail(1.0, 2.0, 5) > picard_tail(1.0, 2.0, 6));
}

TEST_CASE("solver errors") {
    const PotentialGrid p = PotentialGrid::preset("unit", 1.0, 0.01);
    CHECK_THROWS_AS(solve_goursat(p, 1.0, 0.03, 1e-10), InputError);
    CHECK_THROWS_AS(solve_goursat(p, 1.5, 0.01, 1e-10), DomainError);
    CHECK_THROWS_AS(solve_goursat(p, 1.0, 0.01, 0.0), InputError);
    const PotentialGrid big = PotentialGrid::constant(scalar(4.0), 1.0, 0.01);
    CHECK_THROWS_AS(solve_goursat(big, 1.0, 0.02, 1e-14, 2), ConvergenceError);
}

TEST_CASE("characteristic derivatives against finite differences") {
    const double h = 0.01;
    const PotentialGrid p = PotentialGrid::preset("cosine", 1.0, h / 2);
    const KernelField f = solve_goursat(p, 1.0, h, 1e-11);
    const double d = 1e-3;
    for (auto [xi, eta] : {std::pair{0.3, 1.1}, {0.5, 1.5}, {0.2, 0.9}}) {
        const CharacteristicDerivatives dv = derivatives_v(p, f, xi, eta);
        const Matrix fx = (f.interpolate(f.v(), xi + d, eta) - f.interpolate(f.v(), xi - d, eta)) / (2 * d);
        const Matrix fe = (f.interpolate(f.v(), xi, eta + d) - f.interpolate(f.v(), xi, eta - d)) / (2 * d);
        CHECK(op_norm(dv.v_xi - fx) <= 5 * h);
        CHECK(op_norm(dv.v_eta - fe) <= 5 * h);
    }
    // vanishing potential strength leaves only the explicit q / 4 terms
    const double c = 1e-4;
    const PotentialGrid tiny = PotentialGrid::constant(scalar(c), 1.0, 0.01);
    const KernelField ft = solve_goursat(tiny, 1.0, 0.02, 1e-14);
    const CharacteristicDerivatives dt = derivatives_v(tiny, ft, 0.4, 1.2);
    CHECK(std::abs(dt.v_xi(0, 0) - c / 4) <= 1e-8);
    CHECK(std::abs(dt.v_eta(0, 0) + c / 4) <= 1e-8);
}

TEST_CASE("wtilde_x against differences and the Bessel kernel") {
    const double h = 0.01;
    const double c = 1.0;
    const PotentialGrid p = PotentialGrid::constant(scalar(c), 1.0, h / 2);
    const KernelField f = solve_goursat(p, 1.0, h, 1e-11);
    for (auto [x, t] : {std::pair{0.3, 0.8}, {0.5, 1.0}, {0.1, 0.6}}) {
        const Matrix fd = (split_w(p, f, x + h, t).wt - split_w(p, f, x - h, t).wt) / (2 * h);
        CHECK(op_norm(wtilde_x(p, f, x, t) - fd) <= 5 * h);
        const double d = 1e-5;
        const double wx = (testing::bessel_reference(c, x + d, t) - testing::bessel_reference(c, x - d, t)) / (2 * d);
        CHECK(std::abs(wtilde_x(p, f, x, t)(0, 0).real() - (wx + c / 2)) <= 5 * h);
    }
}

TEST_CASE("explicit wtt against differences in t and the PDE identity") {
    for (const char* name : {"unit", "coupled2"}) {
        double prev = 0.0;
        for (double h : {0.02, 0.01}) {
            const PotentialGrid p = PotentialGrid::preset(name, 1.2, h / 2);
            const KernelField f = solve_goursat(p, 1.0, h, 1e-12);
            double worst_t = 0.0, worst_x = 0.0;
            for (double t = 0.5; t <= 0.9; t += 0.2)
                for (double x = 0.1; x <= t - 0.1 + 1e-12; x += 0.1) {
                    auto wt = [&](double a, double b) { return split_w(p, f, a, b).wt; };
                    const Matrix dtt = (wt(x, t + h) - 2.0 * wt(x, t) + wt(x, t - h)) / (h * h);
                    const Matrix dxx = (wt(x + h, t) - 2.0 * wt(x, t) + wt(x - h, t)) / (h * h);
                    const Matrix e = wtt_explicit(p, f, x, t);
                    worst_t = std::max(worst_t, op_norm(e - dtt));
                    worst_x = std::max(worst_x, op_norm(e + p.at(x) * kernel_w(f, x, t) - dxx));
                }
            CHECK(worst_t <= 5 * h);
            CHECK(worst_x <= 5 * h);
            if (prev > 0.0) CHECK(std::log2(prev / worst_x) >= 0.9);
            prev = worst_x;
        }
    }
}

TEST_CASE("kernel constants") {
    const PotentialGrid p = PotentialGrid::preset("unit", 1.0, 0.005);
    const KernelField f = solve_goursat(p, 1.0, 0.01, 1e-10);
    const KernelConstants kc = kernel_constants(p, f);
    const NormConstants nc = norm_constants(p, 1.0);
    CHECK(std::isfinite(kc.b3));
    CHECK(kc.b1 > 0.0);
    CHECK(kc.b4 == doctest::Approx(0.5).epsilon(1e-6));
    const double a1 = nc.a1, b4 = kc.b4;
    const double chain = 2 * a1 * b4 + 3 * a1 * a1 / 4 + 6 * a1 * a1 / 8 + 9 * a1 * a1 * b4 / 4;
    CHECK(kc.b3 <= 1.0 * chain * chain);

    const PotentialGrid c = PotentialGrid::preset("coupled2", 1.0, 0.005);
    const KernelField fc = solve_goursat(c, 1.0, 0.01, 1e-11);
    const Matrix u = testing::random_unitary(2, 5);
    const PotentialGrid cu = c.conjugated(u);
    const KernelField fu = solve_goursat(cu, 1.0, 0.01, 1e-11);
    const KernelConstants k1 = kernel_constants(c, fc);
    const KernelConstants k2 = kernel_constants(cu, fu);
    CHECK(k1.b1 == doctest::Approx(k2.b1).epsilon(1e-10));
    CHECK(k1.b2 == doctest::Approx(k2.b2).epsilon(1e-10));
    CHECK(k1.b3 == doctest::Approx(k2.b3).epsilon(1e-10));
    CHECK(k1.b4 == doctest::Approx(k2.b4).epsilon(1e-10));
}

TEST_CASE("unitary equivariance and diagonal decoupling") {
    const double tol = 1e-10;
    const PotentialGrid p = PotentialGrid::preset("coupled2", 1.0, 0.01);
    const KernelField f = solve_goursat(p, 1.0, 0.02, tol);
    const Matrix u = testing::random_unitary(2, 3);
    const KernelField fu = solve_goursat(p.conjugated(u), 1.0, 0.02, tol);
    CHECK(max_node_distance(fu, f, u) <= 10 * tol);

    const PotentialGrid d = PotentialGrid::constant(testing::diag2(1.0, 3.0), 1.0, 0.01);
    const KernelField fd = solve_goursat(d, 1.0, 0.02, tol);
    const KernelField f1 = solve_goursat(PotentialGrid::constant(scalar(1.0), 1.0, 0.01), 1.0, 0.02, tol);
    const KernelField f3 = solve_goursat(PotentialGrid::constant(scalar(3.0), 1.0, 0.01), 1.0, 0.02, tol);
    double worst = 0.0;
    const std::size_t m = fd.lattice_size();
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j) {
            const Matrix v = fd.v().matrix(i, j);
            worst = std::max({worst, std::abs(v(0, 0) - f1.v().matrix(i, j)(0, 0)),
                              std::abs(v(1, 1) - f3.v().matrix(i, j)(0, 0)), std::abs(v(0, 1)), std::abs(v(1, 0))});
        }
    CHECK(worst <= 10 * tol);
}

TEST_CASE("rebuilding from stored values reproduces every field") {
    const PotentialGrid p = PotentialGrid::preset("coupled2", 1.0, 0.01);
    const KernelField f = solve_goursat(p, 1.0, 0.02, 1e-10);
    const KernelField g = kernel_from_values(p, 1.0, 0.02, f.v(), f.iterations(), f.tail_bound());
    CHECK(max_distance(f.vt_xi(), g.vt_xi()) == 0.0);
    CHECK(max_distance(f.vt_eta(), g.vt_eta()) == 0.0);
    CHECK(max_distance(f.w_hat(), g.w_hat()) == 0.0);
    CHECK_THROWS_AS(kernel_from_values(p, 1.0, 0.01, f.v(), 0, 0.0), InputError);
}
