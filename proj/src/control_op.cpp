#include "wavekernel/control_op.hpp"

#include "wavekernel/errors.hpp"

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace wavekernel {

namespace {

double trap_weight(std::size_t i, std::size_t j, std::size_t N, double d) {
    return (j == i || j == N) ? 0.5 * d : d;
}

double trapezoid_sq(const Eigen::MatrixXcd& g, double d) {
    double acc = 0.0;
    const Eigen::Index last = g.cols() - 1;
    for (Eigen::Index k = 0; k <= last; ++k) acc += ((k == 0 || k == last) ? 0.5 * d : d) * g.col(k).squaredNorm();
    return acc;
}

double sup_norm(const Eigen::MatrixXcd& g) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < g.cols(); ++k) m = std::max(m, g.col(k).norm());
    return m;
}

Eigen::MatrixXcd spline_derivative(const Eigen::MatrixXcd& g, double d, int order) {
    using Spline = boost::math::interpolators::cardinal_quintic_b_spline<double>;
    const auto count = static_cast<std::size_t>(g.cols());
    if (count < 8) throw InputError("h2_norm: need at least 8 samples to differentiate");
    Eigen::MatrixXcd out(g.rows(), g.cols());
    for (Eigen::Index c = 0; c < g.rows(); ++c) {
        std::vector<double> re(count), im(count);
        for (std::size_t k = 0; k < count; ++k) {
            re[k] = g(c, static_cast<Eigen::Index>(k)).real();
            im[k] = g(c, static_cast<Eigen::Index>(k)).imag();
        }
        const Spline sr(re, 0.0, d);
        const Spline si(im, 0.0, d);
        for (std::size_t k = 0; k < count; ++k) {
            const double t = std::min(d * static_cast<double>(k), d * static_cast<double>(count - 1));
            out(c, static_cast<Eigen::Index>(k)) = order == 1 ? cplx(sr.prime(t), si.prime(t))
                                                              : cplx(sr.double_prime(t), si.double_prime(t));
        }
    }
    return out;
}

void check_layout(const VolterraSystem& sys, const Eigen::MatrixXcd& g) {
    if (static_cast<std::size_t>(g.rows()) != sys.dimension() ||
        static_cast<std::size_t>(g.cols()) != sys.intervals() + 1) {
        std::ostringstream msg;
        msg << "volterra: expected " << sys.dimension() << " x " << sys.intervals() + 1 << " samples, got "
            << g.rows() << " x " << g.cols();
        throw InputError(msg.str());
    }
}

Eigen::MatrixXd difference_matrix(std::size_t N, double d, int order) {
    const auto m = static_cast<Eigen::Index>(N + 1);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, m);
    if (order == 1) {
        for (Eigen::Index i = 1; i + 1 < m; ++i) {
            D(i, i - 1) = -0.5 / d;
            D(i, i + 1) = 0.5 / d;
        }
        D(0, 0) = -1.5 / d, D(0, 1) = 2.0 / d, D(0, 2) = -0.5 / d;
        D(m - 1, m - 1) = 1.5 / d, D(m - 1, m - 2) = -2.0 / d, D(m - 1, m - 3) = 0.5 / d;
    } else {
        const double s = 1.0 / (d * d);
        for (Eigen::Index i = 1; i + 1 < m; ++i) {
            D(i, i - 1) = s;
            D(i, i) = -2.0 * s;
            D(i, i + 1) = s;
        }
        D(0, 0) = 2.0 * s, D(0, 1) = -5.0 * s, D(0, 2) = 4.0 * s, D(0, 3) = -s;
        D(m - 1, m - 1) = 2.0 * s, D(m - 1, m - 2) = -5.0 * s, D(m - 1, m - 3) = 4.0 * s, D(m - 1, m - 4) = -s;
    }
    return D;
}

}  // namespace

SampledFunction reflect(const SampledFunction& g) {
    SampledFunction out;
    out.T = g.T;
    out.values = g.values.rowwise().reverse();
    if (g.first) out.first = Eigen::MatrixXcd(-g.first->rowwise().reverse());
    if (g.second) out.second = Eigen::MatrixXcd(g.second->rowwise().reverse());
    return out;
}

SampledFunction sample_control(const Control& f, double T, std::size_t N) {
    if (N == 0) throw InputError("sample_control: need at least one interval");
    const auto n = static_cast<Eigen::Index>(f.dimension());
    SampledFunction out;
    out.T = T;
    out.values.resize(n, static_cast<Eigen::Index>(N + 1));
    Eigen::MatrixXcd d1(n, static_cast<Eigen::Index>(N + 1));
    Eigen::MatrixXcd d2(n, static_cast<Eigen::Index>(N + 1));
    for (std::size_t k = 0; k <= N; ++k) {
        const ControlValue v = f(T * static_cast<double>(k) / static_cast<double>(N));
        const auto c = static_cast<Eigen::Index>(k);
        out.values.col(c) = v.f;
        d1.col(c) = v.df;
        d2.col(c) = v.d2f;
    }
    out.first = std::move(d1);
    out.second = std::move(d2);
    return out;
}

SampledFunction apply_W(const PotentialGrid& p, const KernelField& field, const Control& f, double T, std::size_t N) {
    WaveSnapshot s = propagate(p, field, f, T, N);
    SampledFunction out;
    out.T = T;
    out.values = std::move(s.u);
    out.first = std::move(s.u_x);
    out.second = std::move(s.u_xx);
    return out;
}

VolterraSystem::VolterraSystem(double T, TriangleField blocks) : T_(T), blocks_(std::move(blocks)) {
    const std::size_t N = blocks_.size();
    const auto n = static_cast<Eigen::Index>(blocks_.dimension());
    pivots_.reserve(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        Matrix diag = Matrix::Identity(n, n) + Matrix(blocks_.view(i, i));
        Eigen::PartialPivLU<Matrix> lu(diag);
        const double scale = std::max(1.0, op_norm(diag));
        if (!(std::abs(lu.determinant()) > 1e-12 * std::pow(scale, static_cast<double>(n)))) {
            std::ostringstream msg;
            msg << "volterra: diagonal block " << i << " is singular; refine N";
            throw SingularError(msg.str());
        }
        pivots_.push_back(std::move(lu));
    }
}

Eigen::MatrixXcd VolterraSystem::apply_A(const Eigen::MatrixXcd& g) const {
    check_layout(*this, g);
    const std::size_t N = intervals();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(g.rows(), g.cols());
    for (std::size_t i = 0; i <= N; ++i) {
        Vector acc = Vector::Zero(g.rows());
        for (std::size_t j = i; j <= N; ++j) acc.noalias() += blocks_.view(i, j) * g.col(static_cast<Eigen::Index>(j));
        out.col(static_cast<Eigen::Index>(i)) = acc;
    }
    return out;
}

Eigen::MatrixXcd VolterraSystem::apply(const Eigen::MatrixXcd& g) const { return g + apply_A(g); }

Eigen::MatrixXcd VolterraSystem::solve(const Eigen::MatrixXcd& u) const {
    check_layout(*this, u);
    const std::size_t N = intervals();
    Eigen::MatrixXcd g(u.rows(), u.cols());
    for (std::size_t k = 0; k <= N; ++k) {
        const std::size_t i = N - k;
        Vector rhs = u.col(static_cast<Eigen::Index>(i));
        for (std::size_t j = i + 1; j <= N; ++j) rhs.noalias() -= blocks_.view(i, j) * g.col(static_cast<Eigen::Index>(j));
        g.col(static_cast<Eigen::Index>(i)) = pivots_[i].solve(rhs);
    }
    return g;
}

Eigen::MatrixXcd VolterraSystem::dense() const {
    const std::size_t N = intervals();
    const auto n = static_cast<Eigen::Index>(dimension());
    const Eigen::Index size = n * static_cast<Eigen::Index>(N + 1);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(size, size);
    for (std::size_t i = 0; i <= N; ++i)
        for (std::size_t j = i; j <= N; ++j)
            out.block(n * static_cast<Eigen::Index>(i), n * static_cast<Eigen::Index>(j), n, n) += blocks_.view(i, j);
    return out;
}

VolterraSystem build_volterra(const KernelField& field, double T, std::size_t N) {
    if (!(T > 0.0) || T > field.horizon() * (1.0 + 1e-10)) throw DomainError("build_volterra: T outside the kernel horizon");
    if (N < 2) throw InputError("build_volterra: need at least 2 intervals");
    const double d = T / static_cast<double>(N);
    TriangleField blocks(N, field.dimension());
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i; j <= N; ++j)
            blocks.view(i, j) = trap_weight(i, j, N, d) *
                                kernel_w(field, d * static_cast<double>(i), d * static_cast<double>(j));
    return VolterraSystem(T, std::move(blocks));
}

SampledFunction invert_W(const VolterraSystem& sys, const SampledFunction& u) {
    if (std::abs(u.T - sys.horizon()) > 1e-10 * sys.horizon()) throw InputError("invert_W: horizon mismatch");
    SampledFunction g;
    g.T = u.T;
    g.values = sys.solve(u.values);
    return g;
}

NeumannResult invert_W_neumann(const VolterraSystem& sys, const SampledFunction& u, double tol, int max_terms) {
    if (std::abs(u.T - sys.horizon()) > 1e-10 * sys.horizon()) throw InputError("invert_W: horizon mismatch");
    NeumannResult out;
    out.g.T = u.T;
    Eigen::MatrixXcd term = u.values;
    out.g.values = term;
    out.term_norms.push_back(sup_norm(term));
    out.terms = 1;
    while (out.terms < max_terms) {
        term = -sys.apply_A(term);
        const double norm = sup_norm(term);
        if (norm < tol) {
            out.tail = norm;
            return out;
        }
        out.g.values += term;
        out.term_norms.push_back(norm);
        ++out.terms;
    }
    out.tail = sup_norm(sys.apply_A(term));
    return out;
}

double h2_norm(const SampledFunction& g) {
    const std::size_t N = g.intervals();
    if (N == 0) return 0.0;
    const double d = g.spacing();
    const Eigen::MatrixXcd d1 = g.first ? *g.first : spline_derivative(g.values, d, 1);
    const Eigen::MatrixXcd d2 = g.second ? *g.second : spline_derivative(g.values, d, 2);
    return std::sqrt(trapezoid_sq(g.values, d) + trapezoid_sq(d1, d) + trapezoid_sq(d2, d));
}

ConditionEstimate condition_estimate(const VolterraSystem& sys, std::size_t cap) {
    if (sys.intervals() > cap) {
        std::ostringstream msg;
        msg << "condition_estimate: N = " << sys.intervals() << " above the dense SVD cap " << cap;
        throw InputError(msg.str());
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(sys.dense());
    const auto& s = svd.singularValues();
    ConditionEstimate out;
    out.sigma_max = s(0);
    out.sigma_min = s(s.size() - 1);
    out.cond = out.sigma_max / out.sigma_min;
    return out;
}

double inverse_h2_norm(const VolterraSystem& sys, std::size_t cap) {
    const std::size_t N = sys.intervals();
    if (N > cap) throw InputError("inverse_h2_norm: N above the dense cap");
    if (N < 4) throw InputError("inverse_h2_norm: need at least 4 intervals");
    const double d = sys.horizon() / static_cast<double>(N);
    const auto m = static_cast<Eigen::Index>(N + 1);
    const auto n = static_cast<Eigen::Index>(sys.dimension());

    Eigen::VectorXd wts = Eigen::VectorXd::Constant(m, d);
    wts(0) = wts(m - 1) = 0.5 * d;
    const Eigen::MatrixXd D1 = difference_matrix(N, d, 1);
    const Eigen::MatrixXd D2 = difference_matrix(N, d, 2);
    Eigen::MatrixXd G = Eigen::MatrixXd(wts.asDiagonal());
    G += D1.transpose() * wts.asDiagonal() * D1;
    G += D2.transpose() * wts.asDiagonal() * D2;
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(G).matrixL();

    // node-major layout: kron(L, I_n)
    Eigen::MatrixXcd Lf = Eigen::MatrixXcd::Zero(m * n, m * n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            for (Eigen::Index c = 0; c < n; ++c) Lf(i * n + c, j * n + c) = L(i, j);

    const Eigen::MatrixXcd A = sys.dense();
    const Eigen::MatrixXcd B = A.triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(m * n, m * n));
    // X = Lf^H B Lf^{-H}
    const Eigen::MatrixXcd Y = Lf.triangularView<Eigen::Lower>().solve(B.adjoint()).adjoint();
    const Eigen::MatrixXcd X = Lf.adjoint() * Y;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(X);
    return svd.singularValues()(0);
}

SobolevReport certify_h2_bound(const PotentialGrid& p, const KernelField& field, double T, int trials,
                               std::uint64_t seed, std::size_t N) {
    if (trials <= 0) throw InputError("certify_h2_bound: trial count must be positive");
    if (!(T > 0.0) || T > field.horizon() * (1.0 + 1e-10)) throw DomainError("certify_h2_bound: T outside the kernel horizon");
    if (N < 8) throw InputError("certify_h2_bound: need at least 8 intervals");
    const std::size_t n = field.dimension();
    const auto ni = static_cast<Eigen::Index>(n);
    const double d = T / static_cast<double>(N);

    SobolevReport rep;
    rep.trials = trials;
    rep.seed = seed;
    const NormConstants nc = norm_constants(p, T);
    const KernelConstants kc = kernel_constants(p, field);
    rep.a1 = nc.a1, rep.a2 = nc.a2;
    rep.b1 = kc.b1, rep.b2 = kc.b2, rep.b3 = kc.b3, rep.b4 = kc.b4;
    const double sT = std::sqrt(T);
    rep.bound_i = (rep.a1 + rep.b1) * sT;
    rep.bound_ii = 3.0 * rep.a1 + rep.b2 * T;
    rep.bound_ii0 = (rep.a1 + rep.b1) * T;
    rep.bound_iii = 4.0 * rep.a1 + rep.a2 + (rep.a1 + rep.b2) * sT + std::sqrt(rep.b3);
    const double l2_of_c = rep.bound_ii0 * sT;
    const double d1_of_c = rep.bound_ii * sT;
    rep.bound_h2 = std::sqrt(1.0 + 1.0 / T) *
                   std::sqrt(l2_of_c * l2_of_c + d1_of_c * d1_of_c + rep.bound_iii * rep.bound_iii);

    // kernel tables on the (x_i, s_j) grid
    std::vector<double> x(N + 1);
    for (std::size_t k = 0; k <= N; ++k) x[k] = d * static_cast<double>(k);
    x[N] = T;
    TriangleField tw(N, n), twx(N, n), twxx(N, n), tq1(N, n);
    std::vector<Matrix> half_int(N + 1), qx(N + 1), wtx_diag(N + 1), qT(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        qx[i] = p.at(x[i]);
        half_int[i] = 0.5 * p.antiderivative(x[i]);
        wtx_diag[i] = wtilde_x(p, field, x[i], x[i]);
        qT[i] = 0.25 * (p.at(0.5 * (T - x[i])) - p.at(0.5 * (T + x[i])));
        for (std::size_t j = i; j <= N; ++j) {
            const double s = x[j];
            const Matrix qp = p.at(0.5 * (s + x[i]));
            const Matrix qm = p.at(0.5 * std::max(0.0, s - x[i]));
            const Matrix w = kernel_w(field, x[i], s);
            tw.view(i, j) = w;
            twx.view(i, j) = wtilde_x(p, field, x[i], s) - 0.25 * (qp + qm);
            twxx.view(i, j) = wtt_explicit(p, field, x[i], s) + qx[i] * w;
            tq1.view(i, j) = 0.25 * (qp - qm);
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < trials; ++trial) {
        const int bumps = 1 + static_cast<int>(unit(rng) * 3.0) % 3;
        std::vector<Control> parts;
        for (int b = 0; b < bumps; ++b) {
            const double start = T * (0.02 + 0.6 * unit(rng));
            const double end = start + T * (0.3 + 0.8 * unit(rng));
            Vector amp(ni);
            for (Eigen::Index c = 0; c < ni; ++c) amp(c) = cplx(gauss(rng), gauss(rng));
            parts.push_back(Control::bump(std::max(T, end), start, end, amp));
        }
        Control f = parts.front();
        for (std::size_t b = 1; b < parts.size(); ++b) f = Control::combine(1.0, f, 1.0, parts[b]);
        const SampledFunction fs = sample_control(f, T, N);
        const Eigen::MatrixXcd& f0 = fs.values;
        const Eigen::MatrixXcd& f1 = *fs.first;
        const Eigen::MatrixXcd& f2 = *fs.second;

        Eigen::MatrixXcd af(ni, static_cast<Eigen::Index>(N + 1));
        Eigen::MatrixXcd af1(ni, static_cast<Eigen::Index>(N + 1));
        Eigen::MatrixXcd af2(ni, static_cast<Eigen::Index>(N + 1));
        const Vector fT = f0.col(static_cast<Eigen::Index>(N));
        for (std::size_t i = 0; i <= N; ++i) {
            const auto ci = static_cast<Eigen::Index>(i);
            Vector a0 = Vector::Zero(ni);
            Vector a1 = half_int[i] * f0.col(ci);
            Vector a2 = (qx[i] - wtx_diag[i]) * f0.col(ci) + half_int[i] * f1.col(ci) + qT[i] * fT;
            for (std::size_t j = i; j <= N && i < N; ++j) {
                const double wgt = trap_weight(i, j, N, d);
                const auto cj = static_cast<Eigen::Index>(j);
                a0.noalias() += wgt * (tw.view(i, j) * f0.col(cj));
                a1.noalias() += wgt * (twx.view(i, j) * f0.col(cj));
                a2.noalias() += wgt * (twxx.view(i, j) * f0.col(cj) + tq1.view(i, j) * f1.col(cj));
            }
            af.col(ci) = a0;
            af1.col(ci) = a1;
            af2.col(ci) = a2;
        }

        const double f_l2 = std::sqrt(trapezoid_sq(f0, d));
        const double f_c = sup_norm(f0);
        const double f_c1 = std::max(f_c, sup_norm(f1));
        const double f_h2 = std::sqrt(trapezoid_sq(f0, d) + trapezoid_sq(f1, d) + trapezoid_sq(f2, d));
        const double af_c = sup_norm(af);
        const double r_i = af_c / f_l2;
        const double r_ii = sup_norm(af1) / f_c;
        const double r_ii0 = af_c / f_c;
        const double r_iii = std::sqrt(trapezoid_sq(af2, d)) / f_c1;
        const double r_h2 = std::sqrt(trapezoid_sq(af, d) + trapezoid_sq(af1, d) + trapezoid_sq(af2, d)) / f_h2;
        rep.ratio_i = std::max(rep.ratio_i, r_i);
        rep.ratio_ii = std::max(rep.ratio_ii, r_ii);
        rep.ratio_ii0 = std::max(rep.ratio_ii0, r_ii0);
        rep.ratio_iii = std::max(rep.ratio_iii, r_iii);
        rep.empirical_ratio = std::max(rep.empirical_ratio, r_h2);
        if (r_i > rep.bound_i || r_ii > rep.bound_ii || r_ii0 > rep.bound_ii0 || r_iii > rep.bound_iii ||
            r_h2 > rep.bound_h2)
            ++rep.violations;
    }
    return rep;
}

}  // namespace wavekernel
