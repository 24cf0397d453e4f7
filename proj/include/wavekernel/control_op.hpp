#pragma once

#include "wavekernel/propagator.hpp"

#include <cstdint>
#include <optional>

namespace wavekernel {

/// C^n valued samples at t_k = k T / N (columns), optionally with derivatives.
struct SampledFunction {
    double T = 0.0;
    Eigen::MatrixXcd values;
    std::optional<Eigen::MatrixXcd> first;
    std::optional<Eigen::MatrixXcd> second;

    std::size_t intervals() const { return values.cols() > 0 ? static_cast<std::size_t>(values.cols() - 1) : 0; }
    double spacing() const { return T / static_cast<double>(intervals()); }
};

/// g(T - .) sample by sample. Derivatives are reflected with the chain-rule signs.
SampledFunction reflect(const SampledFunction& g);

/// Samples of f with f' and f'' on N + 1 nodes of [0, T].
SampledFunction sample_control(const Control& f, double T, std::size_t N);

/// u^f(., T) from propagate, as a sampled function.
SampledFunction apply_W(const PotentialGrid& p, const KernelField& field, const Control& f, double T, std::size_t N);

/// Trapezoid discretization of I + A on N + 1 nodes of [0, T], where
/// (A g)(x) = int_x^T w(x, s) g(s) ds. Block (i, j), j >= i, holds the
/// weighted kernel weight_ij w(x_i, s_j); the identity is kept implicit.
class VolterraSystem {
public:
    VolterraSystem(double T, TriangleField blocks);

    double horizon() const { return T_; }
    std::size_t intervals() const { return blocks_.size(); }
    std::size_t dimension() const { return blocks_.dimension(); }
    const TriangleField& blocks() const { return blocks_; }

    /// (I + A) g on the node values.
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& g) const;
    /// A g alone.
    Eigen::MatrixXcd apply_A(const Eigen::MatrixXcd& g) const;
    /// Back substitution from x = T. Throws SingularError on a singular pivot.
    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& u) const;
    /// Dense n(N+1) square matrix, node-major.
    Eigen::MatrixXcd dense() const;

private:
    double T_ = 0.0;
    TriangleField blocks_;
    std::vector<Eigen::PartialPivLU<Matrix>> pivots_;
};

VolterraSystem build_volterra(const KernelField& field, double T, std::size_t N);

/// Solves (I + A) g = u; g is the reflected control, f = reflect(g).
SampledFunction invert_W(const VolterraSystem& sys, const SampledFunction& u);

struct NeumannResult {
    SampledFunction g;
    std::vector<double> term_norms;  // max-norm of (-A)^k u, k = 0, 1, ...
    double tail = 0.0;               // norm of the first omitted term
    int terms = 0;
};

/// Partial sums of sum_k (-A)^k u until a term drops below tol or max_terms.
NeumannResult invert_W_neumann(const VolterraSystem& sys, const SampledFunction& u, double tol = 1e-14,
                               int max_terms = 200);

/// (int ||g||^2 + int ||g'||^2 + int ||g''||^2)^{1/2} by trapezoid; missing
/// derivatives come from a quintic spline through the samples.
double h2_norm(const SampledFunction& g);

struct ConditionEstimate {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double cond = 0.0;
};

inline constexpr std::size_t kDenseSvdCap = 1024;

/// Extreme singular values of the dense I + A. Throws InputError above the cap.
ConditionEstimate condition_estimate(const VolterraSystem& sys, std::size_t cap = kDenseSvdCap);

/// Operator norm of (I + A)^{-1} in the discrete H^2 norm given by trapezoid
/// weights and second-order difference derivatives.
double inverse_h2_norm(const VolterraSystem& sys, std::size_t cap = kDenseSvdCap);

struct SobolevReport {
    double a1 = 0.0, a2 = 0.0;
    double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
    double bound_i = 0.0;       // ||A f||_C <= bound_i ||f||_L2
    double bound_ii = 0.0;      // ||(A f)'||_C <= bound_ii ||f||_C
    double bound_ii0 = 0.0;     // ||A f||_C <= bound_ii0 ||f||_C
    double bound_iii = 0.0;     // ||(A f)''||_L2 <= bound_iii ||f||_C1
    double bound_h2 = 0.0;      // ||A f||_H2 <= bound_h2 ||f||_H2
    double ratio_i = 0.0, ratio_ii = 0.0, ratio_ii0 = 0.0, ratio_iii = 0.0;
    double empirical_ratio = 0.0;  // max ||A f||_H2 / ||f||_H2
    int trials = 0;
    std::uint64_t seed = 0;
    int violations = 0;  // trials breaking any bound

    bool holds() const { return violations == 0; }
};

/// Evaluates estimates i-iii and the H^2 composite on `trials` random
/// sums of smooth bumps (mt19937_64 seeded with `seed`), N + 1 nodes.
SobolevReport certify_h2_bound(const PotentialGrid& p, const KernelField& field, double T, int trials,
                               std::uint64_t seed, std::size_t N = 128);

}  // namespace wavekernel
