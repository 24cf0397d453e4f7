#include "wavekernel/boundary_map.hpp"

#include "wavekernel/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace wavekernel {

namespace {

Matrix hermitian_exp(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Eigen::VectorXd e = es.eigenvalues().array().exp();
    return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Matrix hermitian_sqrt(const Matrix& c) {
    if (c.rows() != c.cols() || c.rows() == 0) throw InputError("weyl: c must be a nonempty square matrix");
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("weyl: c must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.adjoint()));
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
        std::ostringstream msg;
        msg << "weyl: c must be positive definite, smallest eigenvalue " << es.eigenvalues().minCoeff();
        throw InputError(msg.str());
    }
    const Eigen::VectorXd r = es.eigenvalues().cwiseSqrt();
    return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().adjoint();
}

WeylSolution::WeylSolution(double cutoff, double step, std::vector<Matrix> K, std::vector<Matrix> dK, Matrix decay)
    : X_(cutoff), step_(step), K_(std::move(K)), dK_(std::move(dK)), decay_(std::move(decay)) {
    if (K_.size() < 2 || K_.size() != dK_.size()) throw InputError("weyl: inconsistent samples");
}

Matrix WeylSolution::at(double x) const {
    if (x < 0.0) throw DomainError("weyl: x must be nonnegative");
    if (x >= X_) return hermitian_exp(-(x - X_) * decay_) * K_.back();
    const std::size_t last = K_.size() - 1;
    const auto k = std::min(static_cast<std::size_t>(x / step_), last - 1);
    const double s = x / step_ - static_cast<double>(k);
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * K_[k] + (h10 * step_) * dK_[k] + h01 * K_[k + 1] + (h11 * step_) * dK_[k + 1];
}

Matrix WeylSolution::derivative(double x) const {
    if (x < 0.0) throw DomainError("weyl: x must be nonnegative");
    if (x >= X_) return -decay_ * hermitian_exp(-(x - X_) * decay_) * K_.back();
    const std::size_t last = K_.size() - 1;
    const auto k = std::min(static_cast<std::size_t>(x / step_), last - 1);
    const double s = x / step_ - static_cast<double>(k);
    const double d00 = 6.0 * s * (s - 1.0) / step_;
    const double d10 = (1.0 - s) * (1.0 - 3.0 * s);
    const double d01 = -d00;
    const double d11 = s * (3.0 * s - 2.0);
    return d00 * K_[k] + d10 * dK_[k] + d01 * K_[k + 1] + d11 * dK_[k + 1];
}

WeylSolution weyl_solution(const PotentialGrid& p, double X, const Matrix& c) {
    const std::size_t n = p.dimension();
    if (static_cast<std::size_t>(c.rows()) != n) throw InputError("weyl: c and q dimensions differ");
    if (!(X > 0.0)) throw InputError("weyl: cutoff must be positive");
    if (X > p.x_max() * (1.0 + 1e-12)) throw DomainError("weyl: potential does not cover [0, X]");
    const Matrix root = hermitian_sqrt(c);
    const auto pieces = static_cast<std::size_t>(std::max(2.0, std::ceil(X / p.step() - 1e-9)));
    const double h = X / static_cast<double>(pieces);
    const auto ni = static_cast<Eigen::Index>(n);

    std::vector<Matrix> K(pieces + 1), dK(pieces + 1);
    K[pieces] = Matrix::Identity(ni, ni);
    dK[pieces] = -root;
    auto q = [&](double x) { return p.at(std::clamp(x, 0.0, p.x_max())); };
    // y = (K, K'), y' = (K', q K), stepping with -h
    for (std::size_t k = pieces; k > 0; --k) {
        const double x = h * static_cast<double>(k);
        const double hm = -h;
        const Matrix& y0 = K[k];
        const Matrix& z0 = dK[k];
        const Matrix qa = q(x), qm = q(x + 0.5 * hm), qb = q(x + hm);
        const Matrix k1y = z0, k1z = qa * y0;
        const Matrix k2y = z0 + 0.5 * hm * k1z, k2z = qm * (y0 + 0.5 * hm * k1y);
        const Matrix k3y = z0 + 0.5 * hm * k2z, k3z = qm * (y0 + 0.5 * hm * k2y);
        const Matrix k4y = z0 + hm * k3z, k4z = qb * (y0 + hm * k3y);
        K[k - 1] = y0 + (hm / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        dK[k - 1] = z0 + (hm / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    }

    Eigen::JacobiSVD<Matrix> svd(K[0]);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0))) throw SingularError("weyl: K(0) is numerically singular");
    const Matrix r = K[0].inverse();
    for (std::size_t k = 0; k <= pieces; ++k) {
        K[k] = K[k] * r;
        dK[k] = dK[k] * r;
    }
    K[0] = Matrix::Identity(ni, ni);
    return WeylSolution(X, h, std::move(K), std::move(dK), root);
}

WeylResiduals weyl_residuals(const PotentialGrid& p, const WeylSolution& K) {
    WeylResiduals out;
    const auto& s = K.samples();
    const double h = K.step();
    const std::size_t last = s.size() - 1;
    for (std::size_t i = 1; i < last; ++i) {
        const Matrix r = (s[i + 1] - 2.0 * s[i] + s[i - 1]) / (h * h) - p.at(h * static_cast<double>(i)) * s[i];
        out.ode = std::max(out.ode, op_norm(r));
    }
    const Matrix dX = (3.0 * s[last] - 4.0 * s[last - 1] + s[last - 2]) / (2.0 * h);
    out.matching = op_norm(dX + K.decay_matrix() * s[last]);
    out.origin = op_norm(s[0] - Matrix::Identity(s[0].rows(), s[0].cols()));
    return out;
}

std::function<Vector(double)> lambda_map(const WeylSolution& K, const Vector& vec) {
    if (static_cast<std::size_t>(vec.size()) != K.dimension()) throw InputError("lambda_map: dimension mismatch");
    return [K, vec](double x) { return Vector(-(K.at(x) * vec)); };
}

std::function<Vector(double, double)> lift_control(const WeylSolution& K, const Control& f_v) {
    if (f_v.dimension() != K.dimension()) throw InputError("lift_control: dimension mismatch");
    return [K, f_v](double t, double x) { return Vector(-(K.at(x) * f_v.value(t))); };
}

}  // namespace wavekernel
