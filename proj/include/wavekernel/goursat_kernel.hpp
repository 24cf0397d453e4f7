#pragma once

#include "wavekernel/potential.hpp"
#include "wavekernel/triangle_field.hpp"

#include <utility>
#include <vector>

namespace wavekernel {

/// Transmutation kernel in characteristic coordinates.
///
/// Holds v(xi, eta) = w((eta - xi)/2, (eta + xi)/2) on the lattice
/// xi_i = i h, eta_j = j h, 0 <= xi_i <= eta_j <= 2T, together with the
/// explicit part v0, the first derivatives of the integral part
/// vt = v - v0, and the double-integral remainder of vt_xixi + vt_etaeta.
/// Immutable after solve_goursat returns it.
class KernelField {
public:
    double horizon() const { return T_; }
    double step() const { return h_; }
    std::size_t dimension() const { return v_.dimension(); }
    /// Lattice index of eta = 2T.
    std::size_t lattice_size() const { return v_.size(); }

    int iterations() const { return iterations_; }
    double tail_bound() const { return tail_bound_; }
    /// Sup-norm change of the last Picard sweep.
    double last_change() const { return last_change_; }
    /// Sup-norm change after each sweep.
    const std::vector<double>& change_history() const { return history_; }

    const TriangleField& v() const { return v_; }
    const TriangleField& v0() const { return v0_; }
    const TriangleField& vt_xi() const { return vt_xi_; }
    const TriangleField& vt_eta() const { return vt_eta_; }
    /// Double-integral terms of vt_xixi + vt_etaeta (the remainder w-hat).
    const TriangleField& w_hat() const { return w_hat_; }

    /// Interpolated node values: bilinear in (xi, eta), linear on the
    /// half-cells along the diagonal.
    Matrix interpolate(const TriangleField& f, double xi, double eta) const;

private:
    friend KernelField initial_v0(const PotentialGrid&, double, double);
    friend KernelField solve_goursat(const PotentialGrid&, double, double, double, int);
    friend KernelField kernel_from_values(const PotentialGrid&, double, double, TriangleField, int, double);
    friend void finalize_kernel(const PotentialGrid&, KernelField&);

    double T_ = 0.0;
    double h_ = 0.0;
    int iterations_ = 0;
    double tail_bound_ = 0.0;
    double last_change_ = 0.0;
    std::vector<double> history_;
    TriangleField v_, v0_, vt_xi_, vt_eta_, w_hat_;
};

/// Default cap on Picard sweeps.
inline constexpr int kMaxPicardSweeps = 100;

/// v = v0 = -1/2 int_{xi/2}^{eta/2} q at every node, no sweeps performed.
/// h must divide 2T (within rounding) and q must cover [0, T].
KernelField initial_v0(const PotentialGrid& p, double T, double h);

/// (V f)(xi, eta) = -1/4 int_0^xi dxi1 int_xi^eta deta1 q((eta1 - xi1)/2) f(xi1, eta1)
/// with the iterated trapezoid rule on the lattice of spacing h.
TriangleField apply_V(const PotentialGrid& p, const TriangleField& f, double h);

/// Picard iteration v <- v0 + V v until the sup-norm change drops below tol
/// or the factorial tail bound does. Throws ConvergenceError after
/// max_sweeps sweeps.
KernelField solve_goursat(const PotentialGrid& p, double T, double h, double tol,
                          int max_sweeps = kMaxPicardSweeps);

/// Rebuilds a field from stored node values of v (e.g. a kernel dump).
/// Derivative and remainder fields are recomputed from v.
KernelField kernel_from_values(const PotentialGrid& p, double T, double h, TriangleField v, int iterations,
                               double tail_bound);

/// sum_{k > sweeps} S^{k+1} L^k / k! with S = S(2T), L = 2T.
double picard_tail(double S, double L, int sweeps);

/// w(x, t) = v(t - x, t + x), 0 <= x <= t, t - x and t + x within the lattice.
Matrix kernel_w(const KernelField& field, double x, double t);

struct KernelSplit {
    Matrix w0;  // -1/2 int_{(t-x)/2}^{(t+x)/2} q
    Matrix wt;  // w - w0
};

KernelSplit split_w(const PotentialGrid& p, const KernelField& field, double x, double t);

struct CharacteristicDerivatives {
    Matrix v_xi;
    Matrix v_eta;
};

/// v_xi, v_eta at (xi, eta) from the one-integral formulas, evaluated by
/// direct trapezoid quadrature along the lattice lines through the point.
CharacteristicDerivatives derivatives_v(const PotentialGrid& p, const KernelField& field, double xi, double eta);

/// wt_x = vt_eta - vt_xi at (t - x, t + x).
Matrix wtilde_x(const PotentialGrid& p, const KernelField& field, double x, double t);

/// Explicit wt_tt: diagonal-kernel products, q.q single integrals (via the
/// self-convolution p and direct quadrature) and the remainder w-hat.
Matrix wtt_explicit(const PotentialGrid& p, const KernelField& field, double x, double t);

struct KernelConstants {
    double b1 = 0.0;  // max ||wt||
    double b2 = 0.0;  // max ||wt_x||
    double b3 = 0.0;  // int_0^T (int_x^T ||wt_xx|| dt)^2 dx
    double b4 = 0.0;  // max ||w||
};

/// Constants over {0 <= x <= t <= T}. b3 uses wt_xx = wtt_explicit + q w on
/// an (x, t) grid aligned with the lattice, at most `b3_nodes` per axis.
KernelConstants kernel_constants(const PotentialGrid& p, const KernelField& field, std::size_t b3_nodes = 160);

struct GoursatResiduals {
    double diagonal = 0.0;  // max ||v(xi, xi)||
    double edge = 0.0;      // max ||v(0, eta) + 1/2 int_0^{eta/2} q||
    double interior = 0.0;  // max ||Dxi Deta v / h^2 + q v / 4|| at cell centres
};

/// Residuals of the Goursat conditions. The edge reference integral uses the
/// potential's exact antiderivative when it has one.
GoursatResiduals check_goursat(const PotentialGrid& p, const KernelField& field);

/// Largest ||v(xi, eta)|| - S(eta) e^{xi S(eta)} - tail_bound over all nodes
/// (negative when the a priori bound holds everywhere).
double apriori_bound_excess(const PotentialGrid& p, const KernelField& field);

}  // namespace wavekernel
