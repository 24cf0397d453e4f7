#pragma once

#include "wavekernel/control.hpp"
#include "wavekernel/potential.hpp"

#include <functional>
#include <vector>

namespace wavekernel {

/// Decaying matrix solution of -K'' + q K = 0 on the half-line, K(0) = I,
/// for potentials equal to the constant c beyond the cutoff X.
class WeylSolution {
public:
    WeylSolution(double cutoff, double step, std::vector<Matrix> K, std::vector<Matrix> dK, Matrix decay);

    double cutoff() const { return X_; }
    double step() const { return step_; }
    std::size_t dimension() const { return static_cast<std::size_t>(decay_.rows()); }
    const std::vector<Matrix>& samples() const { return K_; }
    const std::vector<Matrix>& derivative_samples() const { return dK_; }
    /// sqrt(c), Hermitian positive definite.
    const Matrix& decay_matrix() const { return decay_; }

    /// Cubic Hermite interpolation on [0, X], exp(-sqrt(c)(x - X)) K(X) beyond.
    Matrix at(double x) const;
    Matrix derivative(double x) const;

private:
    double X_ = 0.0;
    double step_ = 0.0;
    std::vector<Matrix> K_;
    std::vector<Matrix> dK_;
    Matrix decay_;
};

/// Integrates -K'' + q K = 0 backward from K(X) = I, K'(X) = -sqrt(c) with
/// classical RK4 on the potential grid, then right-multiplies by K(0)^{-1}.
/// Throws InputError if c is not Hermitian positive definite and
/// SingularError if K(0) is numerically singular.
WeylSolution weyl_solution(const PotentialGrid& p, double X, const Matrix& c);

/// Hermitian square root of a Hermitian positive definite matrix.
Matrix hermitian_sqrt(const Matrix& c);

struct WeylResiduals {
    double ode = 0.0;       // max ||(K_{i+1} - 2 K_i + K_{i-1}) / h^2 - q_i K_i|| at interior nodes
    double matching = 0.0; // ||K'(X) + sqrt(c) K(X)|| with a one-sided second-order K'(X)
    double origin = 0.0;    // ||K(0) - I||
};

WeylResiduals weyl_residuals(const PotentialGrid& p, const WeylSolution& K);

/// x -> -K(x) vec.
std::function<Vector(double)> lambda_map(const WeylSolution& K, const Vector& vec);

/// (t, x) -> -K(x) f_v(t).
std::function<Vector(double, double)> lift_control(const WeylSolution& K, const Control& f_v);

}  // namespace wavekernel
