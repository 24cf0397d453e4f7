#include "wavekernel/oracle.hpp"

#include "wavekernel/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace wavekernel {

namespace {

Eigen::MatrixXcd resample(const WaveSnapshot& s, const std::vector<double>& x) {
    const auto n = static_cast<Eigen::Index>(s.dimension());
    Eigen::MatrixXcd out(n, static_cast<Eigen::Index>(x.size()));
    const std::size_t N = s.intervals();
    const double d = s.T / static_cast<double>(N);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = std::clamp(x[k] / d, 0.0, static_cast<double>(N));
        const auto i = std::min(static_cast<std::size_t>(r), N - 1);
        const double a = r - static_cast<double>(i);
        out.col(static_cast<Eigen::Index>(k)) =
            (1.0 - a) * s.u.col(static_cast<Eigen::Index>(i)) + a * s.u.col(static_cast<Eigen::Index>(i + 1));
    }
    return out;
}

}  // namespace

WaveSnapshot fd_solve(const PotentialGrid& p, const Control& f, const FDConfig& cfg) {
    if (cfg.N_x < 16) throw InputError("fd_solve: N_x must be at least 16");
    if (!(cfg.cfl > 0.0) || cfg.cfl > 1.0) throw InputError("fd_solve: cfl must lie in (0, 1]");
    if (!(cfg.T > 0.0)) throw InputError("fd_solve: T must be positive");
    if (f.dimension() != p.dimension()) throw InputError("fd_solve: control and potential dimensions differ");

    const auto n = static_cast<Eigen::Index>(p.dimension());
    const std::size_t N = cfg.N_x;
    const double dx = cfg.T / static_cast<double>(N);
    const auto steps = static_cast<std::size_t>(std::ceil(static_cast<double>(N) / cfg.cfl - 1e-9));
    const double dt = cfg.T / static_cast<double>(steps);
    const double r2 = (dt / dx) * (dt / dx);
    const std::size_t edge = steps + 2;
    const auto cols = static_cast<Eigen::Index>(edge + 1);

    std::vector<Matrix> q(edge + 1);
    for (std::size_t i = 0; i <= edge; ++i) q[i] = (dt * dt) * p.at(std::min(dx * static_cast<double>(i), p.x_max()));

    Eigen::MatrixXcd prev = Eigen::MatrixXcd::Zero(n, cols);
    Eigen::MatrixXcd cur = Eigen::MatrixXcd::Zero(n, cols);
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(n, cols);
    prev.col(0) = f.value(0.0);
    if (cfg.observer) cfg.observer(0, 0.0, prev);
    cur.col(0) = f.value(dt);
    if (cfg.observer) cfg.observer(1, dt, cur);
    const bool unit_cfl = cfg.cfl == 1.0;
    for (std::size_t m = 1; m < steps; ++m) {
        for (Eigen::Index i = 1; i < cols - 1; ++i) {
            if (unit_cfl)
                next.col(i) = cur.col(i + 1) + cur.col(i - 1) - prev.col(i) - q[static_cast<std::size_t>(i)] * cur.col(i);
            else
                next.col(i) = 2.0 * cur.col(i) - prev.col(i) +
                              r2 * (cur.col(i + 1) - 2.0 * cur.col(i) + cur.col(i - 1)) -
                              q[static_cast<std::size_t>(i)] * cur.col(i);
        }
        const double t = (m + 1 == steps) ? cfg.T : dt * static_cast<double>(m + 1);
        next.col(0) = f.value(t);
        next.col(cols - 1).setZero();
        std::swap(prev, cur);
        std::swap(cur, next);
        if (cfg.observer) cfg.observer(m + 1, t, cur);
    }

    WaveSnapshot snap;
    snap.T = cfg.T;
    snap.x.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) snap.x[i] = dx * static_cast<double>(i);
    snap.x[N] = cfg.T;
    const auto m = static_cast<Eigen::Index>(N + 1);
    snap.u = cur.leftCols(m);
    snap.u_x.resize(n, m);
    snap.u_xx.resize(n, m);
    for (Eigen::Index i = 1; i < m; ++i) {
        snap.u_x.col(i) = (cur.col(i + 1) - cur.col(i - 1)) / (2.0 * dx);
        snap.u_xx.col(i) = (cur.col(i + 1) - 2.0 * cur.col(i) + cur.col(i - 1)) / (dx * dx);
    }
    snap.u_x.col(0) = (-3.0 * cur.col(0) + 4.0 * cur.col(1) - cur.col(2)) / (2.0 * dx);
    snap.u_xx.col(0) = (2.0 * cur.col(0) - 5.0 * cur.col(1) + 4.0 * cur.col(2) - cur.col(3)) / (dx * dx);
    return snap;
}

double bessel_j1(double z) {
    // sum_k (-1)^k (z/2)^{2k+1} / (k! (k+1)!)
    const long double half = 0.5L * static_cast<long double>(z);
    const long double sq = half * half;
    long double term = half;
    long double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= -sq / (static_cast<long double>(k) * static_cast<long double>(k + 1));
        sum += term;
        if (std::fabs(term) <= 1e-21L * std::fabs(sum)) break;
    }
    return static_cast<double>(sum);
}

double bessel_kernel_constant(double c, double x, double t) {
    if (!(c > 0.0)) throw InputError("bessel_kernel_constant: c must be positive");
    if (!(x >= 0.0) || !(t >= x)) throw DomainError("bessel_kernel_constant: need 0 <= x <= t");
    const double z = std::sqrt(c * (t * t - x * x));
    if (z < 1e-8) return -0.5 * c * x * (1.0 - z * z / 8.0);
    return -c * x * bessel_j1(z) / z;
}

double bessel_substitution_residual(double c, double xi, double eta) {
    if (!(xi >= 0.0) || !(eta >= xi)) throw DomainError("bessel_substitution_residual: need 0 <= xi <= eta");
    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto v = [c](double a, double b) { return bessel_kernel_constant(c, 0.5 * (b - a), 0.5 * (b + a)); };
    const double v0 = -0.25 * c * (eta - xi);
    double inner_total = 0.0;
    if (xi > 0.0 && eta > xi) {
        inner_total = Quad::integrate(
            [&](double x1) { return Quad::integrate([&](double e1) { return v(x1, e1); }, xi, eta, 15, 1e-14); },
            0.0, xi, 15, 1e-14);
    }
    return std::abs(v(xi, eta) - v0 + 0.25 * c * inner_total);
}

Comparison compare(const WaveSnapshot& a, const WaveSnapshot& b) {
    if (std::abs(a.T - b.T) > 1e-12 * std::max(1.0, std::abs(a.T))) {
        std::ostringstream msg;
        msg << "compare: horizons differ (" << a.T << " vs " << b.T << ")";
        throw InputError(msg.str());
    }
    if (a.dimension() != b.dimension()) throw InputError("compare: dimensions differ");
    if (a.intervals() == 0 || b.intervals() == 0) throw InputError("compare: empty snapshot");
    const bool a_coarse = a.intervals() <= b.intervals();
    const bool same_grid = a.x == b.x;
    const std::vector<double>& x = a_coarse ? a.x : b.x;
    const Eigen::MatrixXcd ua = (a_coarse || same_grid) ? a.u : resample(a, x);
    const Eigen::MatrixXcd ub = (!a_coarse || same_grid) ? b.u : resample(b, x);

    Comparison out;
    double err_sq = 0.0;
    double ref_sq = 0.0;
    const std::size_t last = x.size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
        const double wgt = 0.5 * (x[std::min(k + 1, last)] - x[k == 0 ? 0 : k - 1]);
        const auto c = static_cast<Eigen::Index>(k);
        const double e = (ua.col(c) - ub.col(c)).norm();
        err_sq += wgt * e * e;
        ref_sq += wgt * ub.col(c).squaredNorm();
        out.max = std::max(out.max, e);
    }
    out.l2 = std::sqrt(err_sq);
    if (out.l2 == 0.0)
        out.rel_l2 = 0.0;
    else
        out.rel_l2 = ref_sq > 0.0 ? out.l2 / std::sqrt(ref_sq) : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace wavekernel
