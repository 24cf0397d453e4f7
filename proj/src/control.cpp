#include "wavekernel/control.hpp"

#include "wavekernel/errors.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>

#include <cmath>
#include <memory>
#include <vector>

namespace wavekernel {

namespace {

constexpr double kVanishTol = 1e-12;
constexpr int kProbePoints = 16;

ControlValue zeros(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return {Vector::Zero(k), Vector::Zero(k), Vector::Zero(k)};
}

}  // namespace

Control::Control(std::size_t n, double T, double support_start, Evaluator eval)
    : n_(n), T_(T), support_start_(support_start), eval_(std::move(eval)) {
    if (n_ == 0) throw InputError("control: dimension must be positive");
    if (!(T_ > 0.0)) throw InputError("control: horizon must be positive");
    if (!(support_start_ >= 0.0) || support_start_ >= T_)
        throw InputError("control: support_start must lie in [0, T)");
    if (!eval_) throw InputError("control: missing evaluator");
    for (int k = 0; k < kProbePoints; ++k) {
        const double t = support_start_ * static_cast<double>(k) / static_cast<double>(kProbePoints - 1);
        const ControlValue v = eval_(t);
        if (static_cast<std::size_t>(v.f.size()) != n_ || static_cast<std::size_t>(v.df.size()) != n_ ||
            static_cast<std::size_t>(v.d2f.size()) != n_)
            throw InputError("control: evaluator returned wrong dimension");
        const double worst = std::max({v.f.cwiseAbs().maxCoeff(), v.df.cwiseAbs().maxCoeff(),
                                       v.d2f.cwiseAbs().maxCoeff()});
        if (worst > kVanishTol)
            throw InputError("control: f and its derivatives must vanish on [0, support_start], violated at t = " +
                             std::to_string(t));
    }
}

Control Control::zero(std::size_t n, double T) {
    return Control(n, T, 0.0, [n](double) { return zeros(n); });
}

Control Control::bump(double T, double start, double end, const Vector& amplitude) {
    if (!(start > 0.0) || !(end > start)) throw InputError("control: bump needs 0 < start < end");
    const std::size_t n = static_cast<std::size_t>(amplitude.size());
    Vector amp = amplitude;
    auto eval = [n, amp, start, end](double t) {
        if (t <= start || t >= end) return zeros(n);
        const double p = t - start;
        const double r = end - t;
        const double phi = std::exp(-1.0 / p - 1.0 / r);
        const double s1 = 1.0 / (p * p) - 1.0 / (r * r);
        const double s2 = -2.0 / (p * p * p) - 2.0 / (r * r * r);
        return ControlValue{phi * amp, (s1 * phi) * amp, ((s2 + s1 * s1) * phi) * amp};
    };
    return Control(n, T, std::min(start, 0.999 * T), eval);
}

Control Control::from_samples(double T, const Eigen::MatrixXcd& samples, double support_start) {
    using Spline = boost::math::interpolators::cardinal_quintic_b_spline<double>;
    const auto n = static_cast<std::size_t>(samples.rows());
    const auto count = static_cast<std::size_t>(samples.cols());
    if (n == 0 || count < 8) throw InputError("control: need at least 8 samples for a quintic spline");
    const double step = T / static_cast<double>(count - 1);
    auto splines = std::make_shared<std::vector<Spline>>();
    splines->reserve(2 * n);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> re(count);
        std::vector<double> im(count);
        for (std::size_t k = 0; k < count; ++k) {
            re[k] = samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)).real();
            im[k] = samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)).imag();
        }
        splines->emplace_back(re, 0.0, step, std::pair<double, double>{0.0, 0.0});
        splines->emplace_back(im, 0.0, step, std::pair<double, double>{0.0, 0.0});
    }
    auto eval = [n, T, support_start, splines](double t) {
        if (t <= support_start) return zeros(n);
        if (t > T * (1.0 + 1e-12)) throw DomainError("control: sampled control evaluated beyond its horizon");
        const double s = std::min(t, T);
        ControlValue v = zeros(n);
        for (std::size_t c = 0; c < n; ++c) {
            const auto& re = (*splines)[2 * c];
            const auto& im = (*splines)[2 * c + 1];
            const auto k = static_cast<Eigen::Index>(c);
            v.f(k) = cplx(re(s), im(s));
            v.df(k) = cplx(re.prime(s), im.prime(s));
            v.d2f(k) = cplx(re.double_prime(s), im.double_prime(s));
        }
        return v;
    };
    return Control(n, T, support_start, eval);
}

Control Control::combine(cplx alpha, const Control& f, cplx beta, const Control& g) {
    if (f.n_ != g.n_) throw InputError("control: dimension mismatch in combination");
    auto eval = [alpha, beta, f, g](double t) {
        const ControlValue a = f(t);
        const ControlValue b = g(t);
        return ControlValue{alpha * a.f + beta * b.f, alpha * a.df + beta * b.df, alpha * a.d2f + beta * b.d2f};
    };
    return Control(f.n_, std::max(f.T_, g.T_), std::min(f.support_start_, g.support_start_), eval);
}

Control Control::delayed(const Control& f, double tau) {
    if (!(tau >= 0.0)) throw InputError("control: delay must be nonnegative");
    auto eval = [f, tau](double t) { return f(t - tau); };
    return Control(f.n_, f.T_, std::min(f.support_start_ + tau, 0.999 * f.T_), eval);
}

Control Control::derivative(const Control& f, int order) {
    if (order < 0 || order > 2) throw InputError("control: derivative order must be 0, 1 or 2");
    const std::size_t n = f.n_;
    auto eval = [f, order, n](double t) {
        const ControlValue v = f(t);
        const auto k = static_cast<Eigen::Index>(n);
        if (order == 0) return v;
        if (order == 1) return ControlValue{v.df, v.d2f, Vector::Constant(k, cplx(std::nan(""), 0.0))};
        return ControlValue{v.d2f, Vector::Constant(k, cplx(std::nan(""), 0.0)),
                            Vector::Constant(k, cplx(std::nan(""), 0.0))};
    };
    // the NaN placeholders are never probed: they sit outside [0, support_start]
    auto guarded = [eval, start = f.support_start_, n](double t) {
        if (t <= start) return zeros(n);
        return eval(t);
    };
    return Control(n, f.T_, f.support_start_, guarded);
}

ControlValue Control::operator()(double t) const {
    if (t <= support_start_) return zeros(n_);
    return eval_(t);
}

Eigen::MatrixXcd Control::sample(std::size_t N) const {
    if (N == 0) throw InputError("control: need at least one interval");
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(N + 1));
    for (std::size_t k = 0; k <= N; ++k)
        out.col(static_cast<Eigen::Index>(k)) = value(T_ * static_cast<double>(k) / static_cast<double>(N));
    return out;
}

}  // namespace wavekernel
