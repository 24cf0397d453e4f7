#include "wavekernel/potential.hpp"

#include "wavekernel/errors.hpp"
#include "wavekernel/triangle_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wavekernel {

double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

namespace detail {

double block_norm(const cplx* a, std::size_t n) {
    if (n == 1) return std::abs(a[0]);
    if (n == 2) {
        // largest eigenvalue of the Gram matrix a* a, closed form
        const double g00 = std::norm(a[0]) + std::norm(a[2]);
        const double g11 = std::norm(a[1]) + std::norm(a[3]);
        const cplx g01 = std::conj(a[0]) * a[1] + std::conj(a[2]) * a[3];
        const double mean = 0.5 * (g00 + g11);
        const double half_gap = 0.5 * (g00 - g11);
        return std::sqrt(std::max(0.0, mean + std::sqrt(half_gap * half_gap + std::norm(g01))));
    }
    return op_norm(Matrix(ConstMatrixView(a, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))));
}

}  // namespace detail

namespace {

constexpr double kHermitianReject = 1e-8;
// slack for x values that land a rounding error past the last node
constexpr double kRangeSlack = 1e-12;

Matrix scalar(double v) { return Matrix::Constant(1, 1, cplx(v, 0.0)); }

}  // namespace

PotentialGrid::PotentialGrid(double step, std::vector<Matrix> samples,
                             std::optional<MatrixFunction> antiderivative)
    : step_(step), samples_(std::move(samples)), exact_antiderivative_(std::move(antiderivative)) {
    if (!(step_ > 0.0) || !std::isfinite(step_)) throw InputError("potential: step must be positive");
    if (samples_.size() < 2) throw InputError("potential: need at least two samples");
    n_ = static_cast<std::size_t>(samples_.front().rows());
    if (n_ == 0) throw InputError("potential: empty matrices");

    const std::size_t count = samples_.size();
    norms_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        Matrix& q = samples_[i];
        if (static_cast<std::size_t>(q.rows()) != n_ || static_cast<std::size_t>(q.cols()) != n_)
            throw InputError("potential: sample " + std::to_string(i) + " has wrong shape");
        if (!q.allFinite()) throw InputError("potential: sample " + std::to_string(i) + " is not finite");
        const double scale = std::max(op_norm(q), 1e-300);
        const double asym = op_norm(q - q.adjoint());
        if (asym > kHermitianReject * scale) {
            std::ostringstream msg;
            msg << "potential: sample " << i << " is not Hermitian (||q - q*|| = " << asym << ")";
            throw InputError(msg.str());
        }
        q = (0.5 * (q + q.adjoint())).eval();
        norms_[i] = op_norm(q);
    }

    cum_integral_.assign(count, Matrix::Zero(n_, n_));
    cum_norm_.assign(count, 0.0);
    cum_norm_sq_.assign(count, 0.0);
    for (std::size_t i = 1; i < count; ++i) {
        cum_integral_[i] = cum_integral_[i - 1] + 0.5 * step_ * (samples_[i - 1] + samples_[i]);
        cum_norm_[i] = cum_norm_[i - 1] + 0.5 * step_ * (norms_[i - 1] + norms_[i]);
        cum_norm_sq_[i] =
            cum_norm_sq_[i - 1] + 0.5 * step_ * (norms_[i - 1] * norms_[i - 1] + norms_[i] * norms_[i]);
    }
}

PotentialGrid PotentialGrid::zero(std::size_t n, double x_max, double step) {
    return constant(Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)), x_max, step);
}

PotentialGrid PotentialGrid::constant(const Matrix& c, double x_max, double step) {
    Matrix cc = c;
    return from_function([cc](double) { return cc; }, static_cast<std::size_t>(c.rows()), x_max, step,
                         MatrixFunction([cc](double x) { return Matrix(cc * x); }));
}

PotentialGrid PotentialGrid::from_function(const MatrixFunction& q, std::size_t n, double x_max, double step,
                                           std::optional<MatrixFunction> antiderivative) {
    if (!(x_max > 0.0)) throw InputError("potential: x_max must be positive");
    if (!(step > 0.0)) throw InputError("potential: step must be positive");
    const auto intervals = static_cast<std::size_t>(std::ceil(x_max / step - 1e-9));
    std::vector<Matrix> samples;
    samples.reserve(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        Matrix v = q(static_cast<double>(i) * step);
        if (static_cast<std::size_t>(v.rows()) != n) throw InputError("potential: function has wrong dimension");
        samples.push_back(std::move(v));
    }
    return PotentialGrid(step, std::move(samples), std::move(antiderivative));
}

std::vector<std::string> PotentialGrid::preset_names() {
    return {"zero", "unit", "linear", "cosine", "hermitian2", "coupled2", "bump_tail"};
}

PotentialGrid PotentialGrid::preset(const std::string& name, double x_max, double step) {
    using std::cos;
    using std::sin;
    if (name == "zero") return zero(1, x_max, step);
    if (name == "unit") return constant(scalar(1.0), x_max, step);
    if (name == "linear") {
        return from_function([](double x) { return scalar(x); }, 1, x_max, step,
                             MatrixFunction([](double x) { return scalar(0.5 * x * x); }));
    }
    if (name == "cosine") {
        return from_function([](double x) { return scalar(1.0 + 0.5 * cos(2.0 * x)); }, 1, x_max, step,
                             MatrixFunction([](double x) { return scalar(x + 0.25 * sin(2.0 * x)); }));
    }
    if (name == "hermitian2") {
        Matrix c(2, 2);
        c << cplx(2.0, 0.0), cplx(0.5, -0.5), cplx(0.5, 0.5), cplx(1.0, 0.0);
        return constant(c, x_max, step);
    }
    if (name == "coupled2") {
        const cplx off(0.25, 0.25);
        auto q = [off](double x) {
            Matrix m(2, 2);
            m << cplx(1.0 + 0.5 * sin(x), 0.0), off * cos(x), std::conj(off) * cos(x), cplx(2.0 - 0.5 * sin(x), 0.0);
            return m;
        };
        auto anti = [off](double x) {
            Matrix m(2, 2);
            m << cplx(x + 0.5 - 0.5 * cos(x), 0.0), off * sin(x), std::conj(off) * sin(x),
                cplx(2.0 * x - 0.5 + 0.5 * cos(x), 0.0);
            return m;
        };
        return from_function(q, 2, x_max, step, MatrixFunction(anti));
    }
    if (name == "bump_tail") {
        // 1 + 2 sin^2(pi x) on [0, 1], identically 1 beyond
        constexpr double pi = std::numbers::pi;
        auto q = [](double x) {
            const double s = x < 1.0 ? std::sin(pi * x) : 0.0;
            return scalar(1.0 + 2.0 * s * s);
        };
        auto anti = [](double x) {
            const double y = std::min(x, 1.0);
            return scalar(x + y - std::sin(2.0 * pi * y) / (2.0 * pi));
        };
        return from_function(q, 1, x_max, step, MatrixFunction(anti));
    }
    throw InputError("potential: unknown preset '" + name + "'");
}

void PotentialGrid::check_range(double x, const char* what) const {
    const double xm = x_max();
    if (!(x >= -kRangeSlack * std::max(1.0, xm)) || !(x <= xm * (1.0 + kRangeSlack) + kRangeSlack)) {
        std::ostringstream msg;
        msg << what << ": argument " << x << " outside [0, " << xm << "]";
        throw DomainError(msg.str());
    }
}

Matrix PotentialGrid::at(double x) const {
    check_range(x, "potential value");
    const double u = std::clamp(x / step_, 0.0, static_cast<double>(samples_.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(u), samples_.size() - 2);
    const double frac = u - static_cast<double>(k);
    if (frac == 0.0) return samples_[k];
    return (1.0 - frac) * samples_[k] + frac * samples_[k + 1];
}

Matrix PotentialGrid::antiderivative(double x) const {
    check_range(x, "potential integral");
    const double u = std::clamp(x / step_, 0.0, static_cast<double>(samples_.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(u), samples_.size() - 2);
    const double frac = u - static_cast<double>(k);
    if (frac == 0.0) return cum_integral_[k];
    const Matrix qx = (1.0 - frac) * samples_[k] + frac * samples_[k + 1];
    return cum_integral_[k] + (0.5 * frac * step_) * (samples_[k] + qx);
}

Matrix PotentialGrid::integral(double a, double b) const {
    if (a > b) throw DomainError("potential integral: a > b");
    return antiderivative(b) - antiderivative(a);
}

double PotentialGrid::majorant(double eta) const {
    const double x = 0.5 * eta;
    check_range(x, "majorant S");
    const double u = std::clamp(x / step_, 0.0, static_cast<double>(samples_.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(u), samples_.size() - 2);
    const double frac = u - static_cast<double>(k);
    const double nx = (1.0 - frac) * norms_[k] + frac * norms_[k + 1];
    return 0.5 * (cum_norm_[k] + 0.5 * frac * step_ * (norms_[k] + nx));
}

double PotentialGrid::norm_squared_integral(double x) const {
    check_range(x, "norm constants");
    const double u = std::clamp(x / step_, 0.0, static_cast<double>(samples_.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(u), samples_.size() - 2);
    const double frac = u - static_cast<double>(k);
    const double a = norms_[k] * norms_[k];
    const double b = norms_[k + 1] * norms_[k + 1];
    const double sx = (1.0 - frac) * a + frac * b;
    return cum_norm_sq_[k] + 0.5 * frac * step_ * (a + sx);
}

Matrix PotentialGrid::convolution(double x) const {
    check_range(x, "convolution p");
    Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    if (x <= 0.0) return acc;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(x / step_ - 1e-9)));
    const double d = x / static_cast<double>(pieces);
    const double u = x / step_;
    const bool aligned = std::abs(u - std::round(u)) < 1e-9 && pieces == static_cast<std::size_t>(std::round(u));
    for (std::size_t k = 0; k <= pieces; ++k) {
        const double wgt = (k == 0 || k == pieces) ? 0.5 * d : d;
        if (aligned) {
            acc.noalias() += wgt * samples_[k] * samples_[pieces - k];
        } else {
            const double tau = static_cast<double>(k) * d;
            acc.noalias() += wgt * at(tau) * at(std::max(0.0, x - tau));
        }
    }
    return acc;
}

PotentialGrid PotentialGrid::conjugated(const Matrix& unitary) const {
    std::vector<Matrix> s;
    s.reserve(samples_.size());
    for (const auto& q : samples_) s.push_back(conjugate_by(unitary, q));
    std::optional<MatrixFunction> anti;
    if (exact_antiderivative_) {
        MatrixFunction f = *exact_antiderivative_;
        Matrix u = unitary;
        anti = [f, u](double x) { return conjugate_by(u, f(x)); };
    }
    return PotentialGrid(step_, std::move(s), std::move(anti));
}

PotentialGrid build_potential(const PotentialDescription& desc) {
    using Kind = PotentialDescription::Kind;
    switch (desc.kind) {
        case Kind::zero:
            return PotentialGrid::zero(desc.dimension, desc.x_max, desc.step);
        case Kind::constant: {
            if (desc.constant.rows() != desc.constant.cols() || desc.constant.rows() == 0)
                throw InputError("potential: constant matrix must be square");
            return PotentialGrid::constant(desc.constant, desc.x_max, desc.step);
        }
        case Kind::sampled: {
            const auto& x = desc.sample_x;
            if (x.size() < 2 || x.size() != desc.sample_values.size())
                throw InputError("potential: sampled input needs matching x and value arrays of length >= 2");
            if (std::abs(x.front()) > 1e-12) throw InputError("potential: samples must start at x = 0");
            const double h = x[1] - x[0];
            if (!(h > 0.0)) throw InputError("potential: sample grid must be increasing");
            for (std::size_t i = 1; i < x.size(); ++i) {
                if (std::abs((x[i] - x[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(x[i])))
                    throw InputError("potential: nonuniform sample grid at row " + std::to_string(i));
            }
            if (desc.x_max > 0.0 && x.back() < desc.x_max * (1.0 - 1e-12))
                throw InputError("potential: samples end before the requested x_max");
            return PotentialGrid(h, desc.sample_values);
        }
        case Kind::preset:
            return PotentialGrid::preset(desc.preset, desc.x_max, desc.step);
    }
    throw InputError("potential: unknown kind");
}

Matrix integral_Q(const PotentialGrid& p, double a, double b) { return p.integral(a, b); }

double majorant_S(const PotentialGrid& p, double eta) { return p.majorant(eta); }

NormConstants norm_constants(const PotentialGrid& p, double T) {
    if (T > p.x_max() * (1.0 + 1e-12)) throw DomainError("norm constants: T exceeds x_max");
    return {p.majorant(2.0 * T), std::sqrt(p.norm_squared_integral(T))};
}

Matrix convolution_p(const PotentialGrid& p, double x) { return p.convolution(x); }

}  // namespace wavekernel
