#pragma once

#include "wavekernel/control.hpp"
#include "wavekernel/goursat_kernel.hpp"

#include <vector>

namespace wavekernel {

/// u(., T), u_x(., T), u_xx(., T) on N + 1 uniform nodes of [0, T].
/// Columns are nodes, rows are components.
struct WaveSnapshot {
    double T = 0.0;
    std::vector<double> x;
    Eigen::MatrixXcd u;
    Eigen::MatrixXcd u_x;
    Eigen::MatrixXcd u_xx;

    std::size_t dimension() const { return static_cast<std::size_t>(u.rows()); }
    std::size_t intervals() const { return x.empty() ? 0 : x.size() - 1; }
};

/// u(x, T) = f(T - x) + int_x^T w(x, s) f(T - s) ds at x_i = i T / N, trapezoid
/// on the same grid in s. u_xx comes from u_xx = u_tt + q u.
WaveSnapshot propagate(const PotentialGrid& p, const KernelField& field, const Control& f, double T, std::size_t N);

/// f''(t - x) + int_x^t w(x, s) f''(t - s) ds, trapezoid with the kernel step.
Vector u_tt(const KernelField& field, const Control& f, double x, double t);

struct DifferenceQuotientTable {
    std::vector<double> h;
    std::vector<double> error;  // L2 norm of (u(t + h) - u(t)) / h - u_t(t)
    double slope = 0.0;         // least-squares slope of log error against log h
};

/// Difference quotients in time at fixed t, in L2(0, t + max h) on N + 1
/// uniform nodes. Needs t + max(h) <= field horizon.
DifferenceQuotientTable difference_quotient_test(const KernelField& field, const Control& f, double t,
                                                 const std::vector<double>& h_list, std::size_t N = 512);

struct SmoothnessSurrogate {
    double l1_uxx = 0.0;    // int_0^T ||u_xx||
    double max_jump = 0.0;  // max ||(-u_xx + q u)(x_{i+1}) - (-u_xx + q u)(x_i)||
};

SmoothnessSurrogate smoothness_surrogate(const PotentialGrid& p, const WaveSnapshot& s);

/// Least-squares slope of log y against log x over the positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace wavekernel
