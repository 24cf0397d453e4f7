#pragma once

#include "wavekernel/control.hpp"
#include "wavekernel/potential.hpp"
#include "wavekernel/propagator.hpp"

#include <functional>

namespace wavekernel {

struct FDConfig {
    std::size_t N_x = 256;  // intervals on [0, T]
    double cfl = 1.0;       // dt / dx, at most 1
    double T = 1.0;
    /// Called after every time level with (m, t_m, u^m); columns are nodes x_i = i dx.
    std::function<void(std::size_t, double, const Eigen::MatrixXcd&)> observer;
};

/// Leapfrog solution of u_tt - u_xx + q u = 0, u(0, t) = f(t), zero Cauchy
/// data, on a grid extending past x = T so the front never meets the far edge.
/// Beyond the potential's range its last sample is held.
WaveSnapshot fd_solve(const PotentialGrid& p, const Control& f, const FDConfig& cfg);

/// J_1(z) by its power series.
double bessel_j1(double z);

/// w(x, t) = -c x J_1(z) / z, z = sqrt(c (t^2 - x^2)), for the constant potential c.
double bessel_kernel_constant(double c, double x, double t);

/// |v - v0 - V v| at (xi, eta) for the closed form, with adaptive
/// Gauss-Kronrod quadrature of the double integral.
double bessel_substitution_residual(double c, double xi, double eta);

struct Comparison {
    double l2 = 0.0;
    double max = 0.0;
    double rel_l2 = 0.0;  // relative to the L2 norm of b
};

/// Distances between the u fields; the finer grid is linearly interpolated
/// onto the coarser one.
Comparison compare(const WaveSnapshot& a, const WaveSnapshot& b);

}  // namespace wavekernel
