#include "support.hpp"

#include "wavekernel/boundary_map.hpp"
#include "wavekernel/errors.hpp"

#include <boost/numeric/odeint.hpp>
#include <doctest.h>

#include <array>
#include <cmath>

using namespace wavekernel;

namespace {

// scalar -k'' + q k = 0 integrated backward from X with an adaptive
// Dormand-Prince stepper, normalized by k(0)
double odeint_reference(double (*q)(double), double X, double c, double x) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;
    auto rhs = [q](const State& y, State& dy, double s) {
        dy[0] = y[1];
        dy[1] = q(s) * y[0];
    };
    auto run_to = [&](double target) {
        State y{1.0, -std::sqrt(c)};
        odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, y,
                                   X, target, -1e-3);
        return y[0];
    };
    return run_to(x) / run_to(0.0);
}

double bump_tail_q(double x) {
    const double s = x < 1.0 ? std::sin(std::numbers::pi * x) : 0.0;
    return 1.0 + 2.0 * s * s;
}

}  // namespace

TEST_CASE("constant scalar potential gives an exponential") {
    const double c = 2.0;
    const PotentialGrid p = PotentialGrid::constant(testing::scalar(c), 2.0, 0.01);
    const WeylSolution K = weyl_solution(p, 1.0, testing::scalar(c));
    for (double x : {0.0, 0.3, 0.77, 1.0, 1.5, 3.0}) {
        CHECK(std::abs(K.at(x)(0, 0) - std::exp(-std::sqrt(c) * x)) <= 1e-9);
        CHECK(std::abs(K.derivative(x)(0, 0) + std::sqrt(c) * std::exp(-std::sqrt(c) * x)) <= 1e-8);
    }
    const WeylResiduals r = weyl_residuals(p, K);
    CHECK(r.origin == 0.0);
    CHECK(r.matching <= 0.01 * 0.01);
}

TEST_CASE("diagonal potential decouples") {
    const Matrix c = testing::diag2(1.0, 4.0);
    const PotentialGrid p = PotentialGrid::constant(c, 1.0, 0.01);
    const WeylSolution K = weyl_solution(p, 1.0, c);
    for (double x : {0.25, 0.5, 2.0}) {
        const Matrix k = K.at(x);
        CHECK(std::abs(k(0, 0) - std::exp(-x)) <= 1e-9);
        CHECK(std::abs(k(1, 1) - std::exp(-2.0 * x)) <= 1e-9);
        CHECK(std::abs(k(0, 1)) <= 1e-15);
    }
    CHECK(op_norm(K.decay_matrix() - testing::diag2(1.0, 2.0)) <= 1e-14);
}

TEST_CASE("bump with constant tail against an adaptive reference") {
    double prev = 0.0;
    for (double h : {0.02, 0.01, 0.005}) {
        const PotentialGrid p = PotentialGrid::preset("bump_tail", 2.0, h);
        const WeylSolution K = weyl_solution(p, 1.0, testing::scalar(1.0));
        double err = 0.0;
        for (double x : {0.1, 0.35, 0.6, 0.9}) err = std::max(err, std::abs(K.at(x)(0, 0) - odeint_reference(bump_tail_q, 1.0, 1.0, x)));
        const WeylResiduals r = weyl_residuals(p, K);
        CHECK(r.origin == 0.0);
        CHECK(r.ode <= 0.1);
        if (prev > 0.0) CHECK(std::log2(prev / err) >= 1.8);
        prev = err;
        double last = std::abs(K.at(0.0)(0, 0));
        for (double x = 0.05; x <= 3.0; x += 0.05) {
            const double now = std::abs(K.at(x)(0, 0));
            CHECK(now < last);
            last = now;
        }
    }
}

TEST_CASE("conjugation equivariance") {
    const PotentialGrid p = PotentialGrid::preset("coupled2", 1.5, 0.01);
    const Matrix c = p.at(1.5);
    const WeylSolution K = weyl_solution(p, 1.0, c);
    const Matrix u = testing::random_unitary(2, 4);
    const WeylSolution Ku = weyl_solution(p.conjugated(u), 1.0, u * c * u.adjoint());
    for (double x : {0.2, 0.7, 1.4}) CHECK(op_norm(Ku.at(x) - u * K.at(x) * u.adjoint()) <= 1e-10);
}

TEST_CASE("lambda map and lifted control") {
    const PotentialGrid p = PotentialGrid::constant(testing::scalar(1.0), 1.0, 0.01);
    const WeylSolution K = weyl_solution(p, 1.0, testing::scalar(1.0));
    Vector v(1);
    v << cplx(2.0, 1.0);
    const auto lam = lambda_map(K, v);
    CHECK(std::abs(lam(0.5)(0) + v(0) * std::exp(-0.5)) <= 1e-9);
    CHECK(std::abs(lam(0.0)(0) + v(0)) == 0.0);
    const Control f = Control::bump(1.0, 0.1, 0.9, v);
    const auto lift = lift_control(K, f);
    CHECK(std::abs(lift(0.5, 0.0)(0) + f(0.5).f(0)) == 0.0);
    CHECK(std::abs(lift(0.5, 0.4)(0) + std::exp(-0.4) * f(0.5).f(0)) <= 1e-9);
}

TEST_CASE("non-positive tails are rejected") {
    const PotentialGrid p = PotentialGrid::zero(1, 1.0, 0.01);
    CHECK_THROWS_AS(weyl_solution(p, 1.0, testing::scalar(0.0)), InputError);
    CHECK_THROWS_AS(weyl_solution(p, 1.0, testing::scalar(-1.0)), InputError);
    Matrix nh(2, 2);
    nh << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(weyl_solution(PotentialGrid::zero(2, 1.0, 0.01), 1.0, nh), InputError);
    CHECK_THROWS_AS(weyl_solution(p, 2.0, testing::scalar(1.0)), DomainError);
}
