#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wavekernel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitConvergence = 2;
inline constexpr int kExitValidation = 3;

/// Resolved run configuration. Paths are absolute or relative to the
/// config file's directory.
struct RunConfig {
    std::filesystem::path potential;
    double T = 1.0;
    double h = 0.01;
    std::size_t N = 100;
    double tol = 1e-10;

    std::string control = "bump";  // bump | zero | samples
    double control_start = 0.0;    // defaults to 0.1 T
    double control_end = 0.0;      // defaults to 0.9 T
    std::string control_amplitude; // complex entries, one per component; defaults to all ones
    std::filesystem::path control_samples;
    double control_support_start = 0.0;

    std::optional<std::filesystem::path> kernel;    // kernel dump to reuse
    std::optional<std::filesystem::path> snapshot;  // input of invert
    std::filesystem::path output = "out";
    std::uint64_t seed = 0;
    int threads = 1;

    int trials = 100;
    std::size_t cert_nodes = 128;
    std::size_t fd_nodes = 0;  // defaults to N
    double fd_cfl = 1.0;
    double dq_time = 0.0;      // defaults to T / 2
    std::vector<double> dq_steps;

    // validate thresholds
    double max_edge_residual = 1e-4;
    double max_apriori_excess = 0.0;
    double max_oracle_rel_l2 = 1e-3;
    double min_dq_slope = 0.9;
    double max_roundtrip_rel = 1e-10;
    double max_cond = 1e6;

    /// Every key with its resolved value, for the manifest.
    std::map<std::string, std::string> resolved;
};

/// Reads a flat key = value config. Unknown keys raise InputError.
RunConfig load_config(const std::filesystem::path& path);

/// Entry point shared by the tool and the tests. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wavekernel::cli
