#pragma once

#include "wavekernel/types.hpp"

#include <cmath>
#include <random>

namespace wavekernel::testing {

inline Matrix scalar(double c) { return Matrix::Constant(1, 1, cplx(c, 0.0)); }

inline Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

/// Haar-ish unitary from the QR factor of a seeded complex Gaussian matrix.
inline Matrix random_unitary(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<Matrix> qr(z);
    return qr.householderQ() * Matrix::Identity(z.rows(), z.cols());
}

/// Constant-potential kernel from the standard library Bessel function.
inline double bessel_reference(double c, double x, double t) {
    const double z = std::sqrt(c * (t * t - x * x));
    if (z < 1e-12) return -0.5 * c * x;
    return -c * x * std::cyl_bessel_j(1.0, z) / z;
}

inline double max_abs(const Eigen::MatrixXcd& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace wavekernel::testing
