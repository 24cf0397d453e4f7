#include "wavekernel/goursat_kernel.hpp"

#include "wavekernel/errors.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

namespace wavekernel {

namespace {

constexpr double kDomainSlack = 1e-10;

std::size_t lattice_intervals(double T, double h) {
    if (!(T > 0.0) || !(h > 0.0)) throw InputError("kernel: T and h must be positive");
    const double ratio = 2.0 * T / h;
    const double rounded = std::round(ratio);
    if (rounded < 2.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio))
        throw InputError("kernel: h must divide 2T");
    return static_cast<std::size_t>(rounded);
}

// q at the half-lattice points m h / 2, m = 0..M
std::vector<RowMatrix> half_lattice_q(const PotentialGrid& p, std::size_t m, double h) {
    if (0.5 * h * static_cast<double>(m) > p.x_max() * (1.0 + 1e-12) + 1e-12) {
        std::ostringstream msg;
        msg << "kernel: potential covers [0, " << p.x_max() << "] but [0, " << 0.5 * h * static_cast<double>(m)
            << "] is needed";
        throw DomainError(msg.str());
    }
    std::vector<RowMatrix> q(m + 1);
    for (std::size_t k = 0; k <= m; ++k) q[k] = p.at(std::min(0.5 * h * static_cast<double>(k), p.x_max()));
    return q;
}

// Trapezoid line integrals of g(k, l) = q((l - k) h / 2) f(k, l):
//   row(i, j) = int_{xi_i}^{eta_j} g(i, .) along eta,
//   col(i, j) = int_0^{xi_i} g(., j) along xi.
struct LineSums {
    TriangleField row;
    TriangleField col;
};

LineSums line_sums(const std::vector<RowMatrix>& q, const TriangleField& f, double h) {
    const std::size_t m = f.size();
    const std::size_t n = f.dimension();
    const std::size_t nn = n * n;
    TriangleField g(m, n);
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j) detail::mul_add(g.data(i, j), q[j - i].data(), f.data(i, j), n, 1.0);

    LineSums out{TriangleField(m, n), TriangleField(m, n)};
    const cplx half_h(0.5 * h, 0.0);
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = i + 1; j <= m; ++j) {
            cplx* dst = out.row.data(i, j);
            std::copy_n(out.row.data(i, j - 1), nn, dst);
            detail::axpy(dst, g.data(i, j - 1), nn, half_h);
            detail::axpy(dst, g.data(i, j), nn, half_h);
        }
    }
    for (std::size_t j = 0; j <= m; ++j) {
        for (std::size_t i = 1; i <= j; ++i) {
            cplx* dst = out.col.data(i, j);
            std::copy_n(out.col.data(i - 1, j), nn, dst);
            detail::axpy(dst, g.data(i - 1, j), nn, half_h);
            detail::axpy(dst, g.data(i, j), nn, half_h);
        }
    }
    return out;
}

// One-integral operators giving vt_xi and vt_eta from v:
//   L_xi[f](i, j)  = -1/4 row(i, j) + 1/4 col(i, i)
//   L_eta[f](i, j) = -1/4 col(i, j)
std::pair<TriangleField, TriangleField> derivative_operators(const std::vector<RowMatrix>& q, const TriangleField& f,
                                                             double h) {
    const LineSums s = line_sums(q, f, h);
    const std::size_t m = f.size();
    const std::size_t nn = f.dimension() * f.dimension();
    TriangleField lxi(m, f.dimension());
    TriangleField leta(m, f.dimension());
    for (std::size_t i = 0; i <= m; ++i) {
        const cplx* diag = s.col.data(i, i);
        for (std::size_t j = i; j <= m; ++j) {
            cplx* a = lxi.data(i, j);
            detail::axpy(a, s.row.data(i, j), nn, -0.25);
            detail::axpy(a, diag, nn, 0.25);
            detail::axpy(leta.data(i, j), s.col.data(i, j), nn, -0.25);
        }
    }
    return {std::move(lxi), std::move(leta)};
}

TriangleField apply_V_impl(const std::vector<RowMatrix>& q, const TriangleField& f, double h) {
    const std::size_t m = f.size();
    const std::size_t n = f.dimension();
    const std::size_t nn = n * n;
    const LineSums s = line_sums(q, f, h);
    TriangleField out(m, n);
    // C(i, j) = int_0^{xi_i} row(., j) d xi1; column j is swept with a running value
    std::vector<cplx> c_diag((m + 1) * nn, cplx(0.0));
    std::vector<cplx> running(nn);
    const cplx half_h(0.5 * h, 0.0);
    for (std::size_t j = 0; j <= m; ++j) {
        std::fill(running.begin(), running.end(), cplx(0.0));
        for (std::size_t i = 0; i <= j; ++i) {
            if (i > 0) {
                detail::axpy(running.data(), s.row.data(i - 1, j), nn, half_h);
                detail::axpy(running.data(), s.row.data(i, j), nn, half_h);
            }
            if (i == j) std::copy(running.begin(), running.end(), c_diag.begin() + static_cast<std::ptrdiff_t>(i * nn));
            cplx* dst = out.data(i, j);
            detail::axpy(dst, running.data(), nn, -0.25);
        }
    }
    for (std::size_t i = 0; i <= m; ++i) {
        const cplx* ci = c_diag.data() + i * nn;
        for (std::size_t j = i; j <= m; ++j) detail::axpy(out.data(i, j), ci, nn, 0.25);
    }
    for (std::size_t i = 0; i <= m; ++i) std::fill_n(out.data(i, i), nn, cplx(0.0));
    return out;
}

void check_point(const KernelField& field, double xi, double eta) {
    const double top = 2.0 * field.horizon();
    const double slack = kDomainSlack * std::max(1.0, top);
    if (!(xi >= -slack) || !(eta >= xi - slack) || !(eta <= top + slack)) {
        std::ostringstream msg;
        msg << "kernel: point (xi, eta) = (" << xi << ", " << eta << ") outside 0 <= xi <= eta <= " << top;
        throw DomainError(msg.str());
    }
}

// trapezoid over [a, b] with roughly `step` spacing
template <class F>
Matrix trapezoid(double a, double b, double step, std::size_t n, F&& integrand) {
    Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double len = b - a;
    if (len <= 0.0) return acc;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / step - 1e-9)));
    const double d = len / static_cast<double>(pieces);
    for (std::size_t k = 0; k <= pieces; ++k) {
        const double wgt = (k == 0 || k == pieces) ? 0.5 * d : d;
        const double s = (k == pieces) ? b : a + static_cast<double>(k) * d;
        acc.noalias() += wgt * integrand(s);
    }
    return acc;
}

}  // namespace

double picard_tail(double S, double L, int sweeps) {
    if (S <= 0.0 || L <= 0.0) return 0.0;
    // term_k = S (S L)^k / k!, summed from k = sweeps + 1
    const double x = S * L;
    double log_term = std::log(S);
    for (int k = 1; k <= sweeps + 1; ++k) log_term += std::log(x) - std::log(static_cast<double>(k));
    double sum = 0.0;
    for (int k = sweeps + 1; k < sweeps + 10000; ++k) {
        const double term = std::exp(log_term);
        sum += term;
        if (static_cast<double>(k) > x && term <= 1e-17 * sum) break;
        if (term < 1e-300 && static_cast<double>(k) > x) break;
        log_term += std::log(x) - std::log(static_cast<double>(k + 1));
    }
    return sum;
}

Matrix KernelField::interpolate(const TriangleField& f, double xi, double eta) const {
    check_point(*this, xi, eta);
    const std::size_t m = f.size();
    const double u = std::clamp(xi / h_, 0.0, static_cast<double>(m));
    const double w = std::clamp(eta / h_, u, static_cast<double>(m));
    auto j0 = std::min(static_cast<std::size_t>(w), m - 1);
    auto i0 = std::min(static_cast<std::size_t>(u), m - 1);
    if (i0 > j0) i0 = j0;
    const double a = std::clamp(u - static_cast<double>(i0), 0.0, 1.0);
    const double b = std::clamp(w - static_cast<double>(j0), 0.0, 1.0);
    if (i0 < j0) {
        return (1.0 - a) * (1.0 - b) * f.matrix(i0, j0) + a * (1.0 - b) * f.matrix(i0 + 1, j0) +
               (1.0 - a) * b * f.matrix(i0, j0 + 1) + a * b * f.matrix(i0 + 1, j0 + 1);
    }
    // diagonal cell, upper half: corners (i,i), (i,i+1), (i+1,i+1)
    const double aa = std::min(a, b);
    return (1.0 - b) * f.matrix(i0, i0) + (b - aa) * f.matrix(i0, i0 + 1) + aa * f.matrix(i0 + 1, i0 + 1);
}

KernelField initial_v0(const PotentialGrid& p, double T, double h) {
    const std::size_t m = lattice_intervals(T, h);
    const double hh = 2.0 * T / static_cast<double>(m);
    if (0.5 * hh * static_cast<double>(m) > p.x_max() * (1.0 + 1e-12) + 1e-12)
        throw DomainError("kernel: potential domain shorter than T");
    const std::size_t n = p.dimension();
    std::vector<Matrix> anti(m + 1);
    for (std::size_t k = 0; k <= m; ++k) anti[k] = p.antiderivative(std::min(0.5 * hh * static_cast<double>(k), p.x_max()));

    KernelField field;
    field.T_ = T;
    field.h_ = hh;
    field.v0_ = TriangleField(m, n);
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j) field.v0_.view(i, j) = -0.5 * (anti[j] - anti[i]);
    for (std::size_t i = 0; i <= m; ++i) field.v0_.view(i, i).setZero();
    field.v_ = field.v0_;
    return field;
}

TriangleField apply_V(const PotentialGrid& p, const TriangleField& f, double h) {
    if (f.dimension() != p.dimension()) throw InputError("apply_V: dimension mismatch");
    return apply_V_impl(half_lattice_q(p, f.size(), h), f, h);
}

void finalize_kernel(const PotentialGrid& p, KernelField& field) {
    const std::size_t m = field.v_.size();
    const auto q = half_lattice_q(p, m, field.h_);
    auto [lxi, leta] = derivative_operators(q, field.v_, field.h_);
    field.vt_xi_ = std::move(lxi);
    field.vt_eta_ = std::move(leta);

    // derivative of vt along the diagonal direction, D = vt_xi + vt_eta
    TriangleField d = field.vt_xi_;
    {
        auto dst = d.raw();
        auto src = field.vt_eta_.raw();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    auto [hxi, heta] = derivative_operators(q, d, field.h_);
    field.w_hat_ = std::move(hxi);
    auto dst = field.w_hat_.raw();
    auto src = heta.raw();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

KernelField solve_goursat(const PotentialGrid& p, double T, double h, double tol, int max_sweeps) {
    if (!(tol > 0.0)) throw InputError("kernel: tol must be positive");
    KernelField field = initial_v0(p, T, h);
    const std::size_t m = field.v_.size();
    const std::size_t nn = p.dimension() * p.dimension();
    const auto q = half_lattice_q(p, m, field.h_);
    const double S = p.majorant(2.0 * T);

    bool converged = false;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        TriangleField next = apply_V_impl(q, field.v_, field.h_);
        auto nv = next.raw();
        auto v0 = field.v0_.raw();
        for (std::size_t k = 0; k < nv.size(); ++k) nv[k] += v0[k];
        for (std::size_t i = 0; i <= m; ++i) next.view(i, i).setZero();

        double change = 0.0;
        const auto old = field.v_.raw();
        for (std::size_t node = 0; node < next.node_count(); ++node) {
            double s = 0.0;
            for (std::size_t k = node * nn; k < (node + 1) * nn; ++k) s += std::norm(nv[k] - old[k]);
            change = std::max(change, s);
        }
        change = std::sqrt(change);

        field.v_ = std::move(next);
        field.iterations_ = sweep;
        field.last_change_ = change;
        field.history_.push_back(change);
        field.tail_bound_ = picard_tail(S, 2.0 * T, sweep);
        if (change < tol || field.tail_bound_ < tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "kernel: Picard iteration did not converge in " << max_sweeps << " sweeps (last change "
            << field.last_change_ << ", tol " << tol << ")";
        throw ConvergenceError(msg.str());
    }
    finalize_kernel(p, field);
    return field;
}

KernelField kernel_from_values(const PotentialGrid& p, double T, double h, TriangleField v, int iterations,
                               double tail_bound) {
    KernelField field = initial_v0(p, T, h);
    if (v.size() != field.v_.size() || v.dimension() != field.v_.dimension())
        throw InputError("kernel: stored values do not match the lattice for T and h");
    field.v_ = std::move(v);
    field.iterations_ = iterations;
    field.tail_bound_ = tail_bound;
    finalize_kernel(p, field);
    return field;
}

Matrix kernel_w(const KernelField& field, double x, double t) {
    if (x < -kDomainSlack || x > t + kDomainSlack || t > field.horizon() * (1.0 + kDomainSlack)) {
        std::ostringstream msg;
        msg << "kernel_w: (x, t) = (" << x << ", " << t << ") outside 0 <= x <= t <= " << field.horizon();
        throw DomainError(msg.str());
    }
    return field.interpolate(field.v(), t - x, t + x);
}

KernelSplit split_w(const PotentialGrid& p, const KernelField& field, double x, double t) {
    Matrix w = kernel_w(field, x, t);
    const double lo = std::max(0.0, 0.5 * (t - x));
    const double hi = std::max(lo, 0.5 * (t + x));
    Matrix w0 = -0.5 * p.integral(lo, hi);
    Matrix wt = w - w0;
    return {std::move(w0), std::move(wt)};
}

CharacteristicDerivatives derivatives_v(const PotentialGrid& p, const KernelField& field, double xi, double eta) {
    check_point(field, xi, eta);
    xi = std::max(xi, 0.0);
    eta = std::max(eta, xi);
    const double h = field.step();
    const std::size_t n = p.dimension();
    const auto& v = field.v();
    auto vint = [&](double a, double b) { return field.interpolate(v, a, std::max(a, b)); };

    Matrix vt_xi = -0.25 * trapezoid(xi, eta, h, n, [&](double e1) {
        return Matrix(p.at(0.5 * std::max(0.0, e1 - xi)) * vint(xi, e1));
    });
    vt_xi += 0.25 * trapezoid(0.0, xi, h, n, [&](double x1) {
        return Matrix(p.at(0.5 * std::max(0.0, xi - x1)) * vint(x1, xi));
    });
    Matrix vt_eta = -0.25 * trapezoid(0.0, xi, h, n, [&](double x1) {
        return Matrix(p.at(0.5 * std::max(0.0, eta - x1)) * vint(x1, eta));
    });
    return {0.25 * p.at(0.5 * xi) + vt_xi, -0.25 * p.at(0.5 * eta) + vt_eta};
}

Matrix wtilde_x(const PotentialGrid& p, const KernelField& field, double x, double t) {
    (void)p;
    if (x < -kDomainSlack || x > t + kDomainSlack) throw DomainError("wtilde_x: (x, t) outside 0 <= x <= t");
    const double xi = t - x;
    const double eta = t + x;
    return field.interpolate(field.vt_eta(), xi, eta) - field.interpolate(field.vt_xi(), xi, eta);
}

Matrix wtt_explicit(const PotentialGrid& p, const KernelField& field, double x, double t) {
    if (x < -kDomainSlack || x > t + kDomainSlack) throw DomainError("wtt_explicit: (x, t) outside 0 <= x <= t");
    x = std::clamp(x, 0.0, t);
    const double xi = t - x;
    const double eta = t + x;
    check_point(field, xi, eta);
    const std::size_t n = p.dimension();
    const double hq = std::min(p.step(), 0.5 * field.step());
    const double a = 0.5 * xi;   // (t - x) / 2
    const double b = 0.5 * eta;  // (t + x) / 2

    const Matrix qa = p.at(a);
    const Matrix qb = p.at(b);
    const auto& v = field.v();

    // q(xi/2) v(0, xi) - q(eta/2) v(0, eta), i.e. the diagonal kernel values w(a, a), w(b, b)
    Matrix out = 0.25 * (qa * field.interpolate(v, 0.0, xi) - qb * field.interpolate(v, 0.0, eta));

    const Matrix shifted = trapezoid(0.0, x, hq, n, [&](double tau) { return Matrix(p.at(tau) * p.at(a + tau)); });
    const Matrix reflected = trapezoid(0.0, x, hq, n, [&](double tau) {
        return Matrix(p.at(tau) * p.at(std::max(0.0, b - tau)));
    });
    Matrix single = shifted;
    single -= p.integral(0.0, x) * qa;
    single += p.convolution(a);
    single -= p.integral(0.0, a) * qa;
    single += p.integral(x, b) * qb;
    single -= p.convolution(b) - reflected;
    out += 0.125 * single;

    out += field.interpolate(field.w_hat(), xi, eta);
    return out;
}

KernelConstants kernel_constants(const PotentialGrid& p, const KernelField& field, std::size_t b3_nodes) {
    KernelConstants c;
    const std::size_t m = field.lattice_size();
    const std::size_t n = field.dimension();
    const std::size_t nn = n * n;
    std::vector<cplx> scratch(nn);
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = i; j <= m && i + j <= m; ++j) {
            const cplx* v = field.v().data(i, j);
            const cplx* v0 = field.v0().data(i, j);
            const cplx* dx = field.vt_xi().data(i, j);
            const cplx* de = field.vt_eta().data(i, j);
            for (std::size_t k = 0; k < nn; ++k) scratch[k] = v[k] - v0[k];
            c.b1 = std::max(c.b1, detail::block_norm(scratch.data(), n));
            for (std::size_t k = 0; k < nn; ++k) scratch[k] = de[k] - dx[k];
            c.b2 = std::max(c.b2, detail::block_norm(scratch.data(), n));
            c.b4 = std::max(c.b4, detail::block_norm(v, n));
        }
    }

    // b3 on an (x, t) grid; lattice aligned when T / h is an integer
    const double T = field.horizon();
    const double th = T / field.step();
    std::size_t nodes = std::max<std::size_t>(b3_nodes, 2);
    if (std::abs(th - std::round(th)) < 1e-9) {
        const auto per_axis = static_cast<std::size_t>(std::round(th));
        const std::size_t stride = (per_axis + b3_nodes - 1) / std::max<std::size_t>(b3_nodes, 1);
        if (per_axis % std::max<std::size_t>(stride, 1) == 0) nodes = per_axis / std::max<std::size_t>(stride, 1);
    }
    const double d = T / static_cast<double>(nodes);
    std::vector<double> inner(nodes + 1, 0.0);
    for (std::size_t ia = 0; ia <= nodes; ++ia) {
        const double x = static_cast<double>(ia) * d;
        const Matrix qx = p.at(x);
        double acc = 0.0;
        for (std::size_t ib = ia; ib <= nodes; ++ib) {
            const double t = static_cast<double>(ib) * d;
            const Matrix wxx = wtt_explicit(p, field, x, t) + qx * kernel_w(field, x, t);
            const double wgt = (ib == ia || ib == nodes) ? 0.5 * d : d;
            acc += wgt * op_norm(wxx);
        }
        if (ia == nodes) acc = 0.0;
        inner[ia] = acc;
    }
    for (std::size_t ia = 0; ia <= nodes; ++ia) {
        const double wgt = (ia == 0 || ia == nodes) ? 0.5 * d : d;
        c.b3 += wgt * inner[ia] * inner[ia];
    }
    return c;
}

GoursatResiduals check_goursat(const PotentialGrid& p, const KernelField& field) {
    GoursatResiduals r;
    const std::size_t m = field.lattice_size();
    const double h = field.step();
    const auto& v = field.v();
    for (std::size_t i = 0; i <= m; ++i) r.diagonal = std::max(r.diagonal, op_norm(v.matrix(i, i)));

    const auto& exact = p.exact_antiderivative();
    const Matrix base = exact ? (*exact)(0.0) : Matrix::Zero(static_cast<Eigen::Index>(p.dimension()),
                                                            static_cast<Eigen::Index>(p.dimension()));
    for (std::size_t j = 0; j <= m; ++j) {
        const double x = std::min(0.5 * h * static_cast<double>(j), p.x_max());
        const Matrix integral = exact ? Matrix((*exact)(x) - base) : p.antiderivative(x);
        r.edge = std::max(r.edge, op_norm(v.matrix(0, j) + 0.5 * integral));
    }

    const auto q = half_lattice_q(p, m, h);
    for (std::size_t i = 0; i + 1 <= m; ++i) {
        for (std::size_t j = i + 1; j + 1 <= m; ++j) {
            const Matrix v00 = v.matrix(i, j);
            const Matrix v10 = v.matrix(i + 1, j);
            const Matrix v01 = v.matrix(i, j + 1);
            const Matrix v11 = v.matrix(i + 1, j + 1);
            const Matrix mixed = (v11 - v10 - v01 + v00) / (h * h);
            const Matrix centre = 0.25 * (v00 + v10 + v01 + v11);
            r.interior = std::max(r.interior, op_norm(mixed + 0.25 * q[j - i] * centre));
        }
    }
    return r;
}

double apriori_bound_excess(const PotentialGrid& p, const KernelField& field) {
    const std::size_t m = field.lattice_size();
    const double h = field.step();
    const std::size_t n = field.dimension();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= m; ++j) {
        const double eta = h * static_cast<double>(j);
        const double S = p.majorant(std::min(eta, 2.0 * p.x_max()));
        for (std::size_t i = 0; i <= j; ++i) {
            const double xi = h * static_cast<double>(i);
            const double bound = S * std::exp(xi * S) + field.tail_bound();
            worst = std::max(worst, detail::block_norm(field.v().data(i, j), n) - bound);
        }
    }
    return worst;
}

}  // namespace wavekernel
