#include "wavekernel/propagator.hpp"

#include "wavekernel/errors.hpp"

#include <cmath>
#include <sstream>

namespace wavekernel {

namespace {

constexpr double kSlack = 1e-10;

void check_horizons(const KernelField& field, const Control& f, double T) {
    if (!(T > 0.0)) throw InputError("propagate: T must be positive");
    if (T > field.horizon() * (1.0 + kSlack)) {
        std::ostringstream msg;
        msg << "propagate: T = " << T << " exceeds the kernel horizon " << field.horizon();
        throw DomainError(msg.str());
    }
    if (f.horizon() < T * (1.0 - kSlack)) {
        std::ostringstream msg;
        msg << "propagate: control horizon " << f.horizon() << " is shorter than T = " << T;
        throw InputError(msg.str());
    }
    if (f.dimension() != field.dimension()) throw InputError("propagate: control and kernel dimensions differ");
}

// w(x_i, s_j) for s_j >= x_i on the uniform grid of [0, L]
TriangleField kernel_table(const KernelField& field, double L, std::size_t N) {
    TriangleField table(N, field.dimension());
    const double d = L / static_cast<double>(N);
    for (std::size_t i = 0; i <= N; ++i)
        for (std::size_t j = i; j <= N; ++j)
            table.view(i, j) = kernel_w(field, d * static_cast<double>(i), d * static_cast<double>(j));
    return table;
}

double trap_weight(std::size_t i, std::size_t j, std::size_t N, double d) {
    return (j == i || j == N) ? 0.5 * d : d;
}

// f(tau - x_i) + int_{x_i}^L w(x_i, s) f(tau - s) ds for every node, with
// `value` selecting f, f' or f'' from the control
template <class Pick>
Eigen::MatrixXcd represent(const TriangleField& table, const Control& f, double L, double tau, Pick pick) {
    const std::size_t N = table.size();
    const auto n = static_cast<Eigen::Index>(table.dimension());
    const double d = L / static_cast<double>(N);
    std::vector<Vector> fv(N + 1);
    for (std::size_t j = 0; j <= N; ++j) fv[j] = pick(f(tau - d * static_cast<double>(j)));
    Eigen::MatrixXcd out(n, static_cast<Eigen::Index>(N + 1));
    for (std::size_t i = 0; i <= N; ++i) {
        Vector acc = fv[i];
        if (i < N)
            for (std::size_t j = i; j <= N; ++j) acc.noalias() += trap_weight(i, j, N, d) * (table.view(i, j) * fv[j]);
        out.col(static_cast<Eigen::Index>(i)) = acc;
    }
    return out;
}

double l2_norm(const Eigen::MatrixXcd& g, double d) {
    double acc = 0.0;
    const Eigen::Index last = g.cols() - 1;
    for (Eigen::Index k = 0; k <= last; ++k) {
        const double wgt = (k == 0 || k == last) ? 0.5 * d : d;
        acc += wgt * g.col(k).squaredNorm();
    }
    return std::sqrt(acc);
}

}  // namespace

WaveSnapshot propagate(const PotentialGrid& p, const KernelField& field, const Control& f, double T, std::size_t N) {
    check_horizons(field, f, T);
    if (N < 2) throw InputError("propagate: need at least 2 intervals");
    if (p.dimension() != field.dimension()) throw InputError("propagate: potential and kernel dimensions differ");
    const auto n = static_cast<Eigen::Index>(field.dimension());
    const double d = T / static_cast<double>(N);

    WaveSnapshot snap;
    snap.T = T;
    snap.x.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) snap.x[i] = d * static_cast<double>(i);
    snap.x[N] = T;

    const TriangleField w = kernel_table(field, T, N);
    snap.u = represent(w, f, T, T, [](const ControlValue& v) { return v.f; });
    const Eigen::MatrixXcd utt = represent(w, f, T, T, [](const ControlValue& v) { return v.d2f; });
    snap.u.col(static_cast<Eigen::Index>(N)).setZero();

    std::vector<ControlValue> fv(N + 1);
    for (std::size_t j = 0; j <= N; ++j) fv[j] = f(T - snap.x[j]);

    snap.u_x.resize(n, static_cast<Eigen::Index>(N + 1));
    snap.u_xx.resize(n, static_cast<Eigen::Index>(N + 1));
    for (std::size_t i = 0; i <= N; ++i) {
        const double x = snap.x[i];
        Vector ux = -fv[i].df - w.view(i, i) * fv[i].f;
        for (std::size_t j = i; j <= N && i < N; ++j) {
            const double s = snap.x[j];
            Matrix wx = wtilde_x(p, field, x, s) - 0.25 * (p.at(0.5 * (s + x)) + p.at(0.5 * (s - x)));
            ux.noalias() += trap_weight(i, j, N, d) * (wx * fv[j].f);
        }
        const auto c = static_cast<Eigen::Index>(i);
        snap.u_x.col(c) = ux;
        snap.u_xx.col(c) = utt.col(c) + p.at(x) * snap.u.col(c);
    }
    return snap;
}

Vector u_tt(const KernelField& field, const Control& f, double x, double t) {
    if (x < -kSlack || x > t + kSlack || t > field.horizon() * (1.0 + kSlack)) {
        std::ostringstream msg;
        msg << "u_tt: (x, t) = (" << x << ", " << t << ") outside 0 <= x <= t <= " << field.horizon();
        throw DomainError(msg.str());
    }
    x = std::clamp(x, 0.0, t);
    Vector acc = f(t - x).d2f;
    const double len = t - x;
    if (len <= 0.0) return acc;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / field.step() - 1e-9)));
    const double d = len / static_cast<double>(pieces);
    for (std::size_t k = 0; k <= pieces; ++k) {
        const double s = (k == pieces) ? t : x + d * static_cast<double>(k);
        const double wgt = (k == 0 || k == pieces) ? 0.5 * d : d;
        acc.noalias() += wgt * (kernel_w(field, x, s) * f(t - s).d2f);
    }
    return acc;
}

DifferenceQuotientTable difference_quotient_test(const KernelField& field, const Control& f, double t,
                                                 const std::vector<double>& h_list, std::size_t N) {
    if (h_list.empty()) throw InputError("difference_quotient_test: empty step list");
    for (std::size_t k = 0; k < h_list.size(); ++k) {
        if (!(h_list[k] > 0.0)) throw InputError("difference_quotient_test: steps must be positive");
        if (k > 0 && !(h_list[k] < h_list[k - 1]))
            throw InputError("difference_quotient_test: steps must be decreasing");
    }
    const double L = t + h_list.front();
    if (!(t >= 0.0) || L > field.horizon() * (1.0 + kSlack) || L > f.horizon() * (1.0 + kSlack))
        throw DomainError("difference_quotient_test: t + max(h) exceeds the horizon");
    if (N < 2) throw InputError("difference_quotient_test: need at least 2 intervals");

    const TriangleField w = kernel_table(field, L, N);
    const double d = L / static_cast<double>(N);
    const Eigen::MatrixXcd u0 = represent(w, f, L, t, [](const ControlValue& v) { return v.f; });
    const Eigen::MatrixXcd ut = represent(w, f, L, t, [](const ControlValue& v) { return v.df; });

    DifferenceQuotientTable table;
    table.h = h_list;
    for (double h : h_list) {
        const Eigen::MatrixXcd u1 = represent(w, f, L, t + h, [](const ControlValue& v) { return v.f; });
        table.error.push_back(l2_norm((u1 - u0) / h - ut, d));
    }
    table.slope = loglog_slope(table.h, table.error);
    return table;
}

SmoothnessSurrogate smoothness_surrogate(const PotentialGrid& p, const WaveSnapshot& s) {
    SmoothnessSurrogate out;
    const std::size_t N = s.intervals();
    if (N == 0) return out;
    Vector prev;
    for (std::size_t i = 0; i <= N; ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        const double d = s.x[std::min(i + 1, N)] - s.x[i == 0 ? 0 : i - 1];
        out.l1_uxx += 0.5 * d * s.u_xx.col(c).norm();
        Vector g = -s.u_xx.col(c) + p.at(s.x[i]) * s.u.col(c);
        if (i > 0) out.max_jump = std::max(out.max_jump, (g - prev).norm());
        prev = std::move(g);
    }
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double count = 0.0;
    for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
        const double lx = std::log(x[k]);
        const double ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        count += 1.0;
    }
    const double den = count * sxx - sx * sx;
    if (count < 2.0 || den == 0.0) return 0.0;
    return (count * sxy - sx * sy) / den;
}

}  // namespace wavekernel
