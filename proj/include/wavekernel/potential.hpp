#pragma once

#include "wavekernel/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wavekernel {

/// Analytic matrix function of one real variable.
using MatrixFunction = std::function<Matrix(double)>;

/// How a potential is to be built. Mirrors the `kind` key of potential files.
struct PotentialDescription {
    enum class Kind { zero, constant, sampled, preset };

    Kind kind = Kind::zero;
    std::size_t dimension = 1;
    double x_max = 0.0;
    double step = 0.0;                 // grid spacing; ignored for sampled input
    Matrix constant;                   // Kind::constant
    std::vector<double> sample_x;      // Kind::sampled, must be uniform and start at 0
    std::vector<Matrix> sample_values; // Kind::sampled
    std::string preset;                // Kind::preset
};

/// Uniformly sampled Hermitian matrix potential q on [0, x_max].
///
/// Between nodes q is linearly interpolated. The trapezoid antiderivatives
/// of q and of ||q|| (operator 2-norm) are cached at every node, so that
/// integrals over arbitrary subintervals cost O(1). Immutable once built.
class PotentialGrid {
public:
    /// Samples at x_i = i * step; values are Hermitianized after the
    /// asymmetry check. Throws InputError for non-Hermitian data.
    PotentialGrid(double step, std::vector<Matrix> samples,
                  std::optional<MatrixFunction> antiderivative = std::nullopt);

    static PotentialGrid zero(std::size_t n, double x_max, double step);
    static PotentialGrid constant(const Matrix& c, double x_max, double step);
    /// Samples a function on the uniform grid. `antiderivative`, when known,
    /// is used as an exact reference by residual checks.
    static PotentialGrid from_function(const MatrixFunction& q, std::size_t n, double x_max,
                                       double step,
                                       std::optional<MatrixFunction> antiderivative = std::nullopt);
    /// Named analytic potentials, see preset_names().
    static PotentialGrid preset(const std::string& name, double x_max, double step);
    static std::vector<std::string> preset_names();

    std::size_t dimension() const { return n_; }
    double x_max() const { return step_ * static_cast<double>(samples_.size() - 1); }
    double step() const { return step_; }
    std::size_t node_count() const { return samples_.size(); }

    const Matrix& sample(std::size_t i) const { return samples_[i]; }
    const Matrix& cumulative_integral(std::size_t i) const { return cum_integral_[i]; }
    double cumulative_norm_integral(std::size_t i) const { return cum_norm_[i]; }
    double sample_norm(std::size_t i) const { return norms_[i]; }

    /// Piecewise-linear value q(x), 0 <= x <= x_max.
    Matrix at(double x) const;

    /// int_0^x q for the piecewise-linear interpolant.
    Matrix antiderivative(double x) const;

    /// int_a^b q(s) ds, trapezoid on the grid with interpolated endpoints.
    Matrix integral(double a, double b) const;

    /// S(eta) = 1/2 int_0^{eta/2} ||q(s)|| ds.
    double majorant(double eta) const;

    /// int_0^x ||q||^2 for the norms interpolated linearly between nodes.
    double norm_squared_integral(double x) const;

    /// p(x) = int_0^x q(tau) q(x - tau) d tau by the trapezoid rule.
    Matrix convolution(double x) const;

    /// Exact antiderivative when the potential came from an analytic source.
    const std::optional<MatrixFunction>& exact_antiderivative() const { return exact_antiderivative_; }

    /// Same grid, samples replaced by U q U*.
    PotentialGrid conjugated(const Matrix& unitary) const;

private:
    void check_range(double x, const char* what) const;

    std::size_t n_ = 1;
    double step_ = 0.0;
    std::vector<Matrix> samples_;
    std::vector<Matrix> cum_integral_;
    std::vector<double> norms_;
    std::vector<double> cum_norm_;
    std::vector<double> cum_norm_sq_;
    std::optional<MatrixFunction> exact_antiderivative_;
};

/// Builds a potential from a description. Non-Hermitian input beyond 1e-8
/// (relative) and nonuniform sample grids raise InputError.
PotentialGrid build_potential(const PotentialDescription& desc);

/// integral_Q(p, a, b) = int_a^b q.
Matrix integral_Q(const PotentialGrid& p, double a, double b);

/// S(eta) = 1/2 int_0^{eta/2} ||q||, defined for 0 <= eta <= 2 x_max.
double majorant_S(const PotentialGrid& p, double eta);

struct NormConstants {
    double a1 = 0.0;  // 1/2 ||q||_{L1(0,T)}
    double a2 = 0.0;  // ||q||_{L2(0,T)}
};

NormConstants norm_constants(const PotentialGrid& p, double T);

/// p(x) = int_0^x q(tau) q(x - tau) d tau.
Matrix convolution_p(const PotentialGrid& p, double x);

}  // namespace wavekernel
