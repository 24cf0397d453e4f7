#pragma once

#include "wavekernel/types.hpp"

#include <functional>

namespace wavekernel {

/// f, f', f'' at one instant.
struct ControlValue {
    Vector f;
    Vector df;
    Vector d2f;
};

/// Boundary control f on [0, T] with two derivatives, vanishing on
/// [0, support_start] and continued by zero to negative times.
class Control {
public:
    using Evaluator = std::function<ControlValue(double)>;

    /// Throws InputError unless f, f', f'' vanish (to 1e-12) at 16 probe
    /// points in [0, support_start].
    Control(std::size_t n, double T, double support_start, Evaluator eval);

    static Control zero(std::size_t n, double T);

    /// amplitude * exp(-1/(t - start)) exp(-1/(end - t)) on (start, end), zero elsewhere.
    static Control bump(double T, double start, double end, const Vector& amplitude);

    /// Quintic-spline fit of samples at t_k = k T / K (columns of `samples`),
    /// forced to zero on [0, support_start].
    static Control from_samples(double T, const Eigen::MatrixXcd& samples, double support_start);

    /// alpha f + beta g.
    static Control combine(cplx alpha, const Control& f, cplx beta, const Control& g);

    /// t -> f(t - tau), zero for t < tau.
    static Control delayed(const Control& f, double tau);

    /// t -> f^{(k)}(t) shifted down by k derivatives; k in {1, 2} drops the
    /// derivatives that are not available.
    static Control derivative(const Control& f, int order);

    std::size_t dimension() const { return n_; }
    double horizon() const { return T_; }
    double support_start() const { return support_start_; }

    /// Zero for t <= support_start (including negative t).
    ControlValue operator()(double t) const;
    Vector value(double t) const { return (*this)(t).f; }

    /// Samples f(t_k) at t_k = k T / N as an n x (N + 1) matrix.
    Eigen::MatrixXcd sample(std::size_t N) const;

private:
    std::size_t n_ = 1;
    double T_ = 0.0;
    double support_start_ = 0.0;
    Evaluator eval_;
};

}  // namespace wavekernel
