#pragma once

#include "wavekernel/control_op.hpp"
#include "wavekernel/goursat_kernel.hpp"
#include "wavekernel/potential.hpp"
#include "wavekernel/propagator.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace wavekernel::io {

/// Flat `key = value` text; `#` starts a comment, blank lines are skipped.
/// Duplicate keys and lines without `=` raise InputError naming the line.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin);
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

/// Parses "1", "-2.5", "0.5+0.5i", "-i", "3e-2-1.5e-1i".
cplx parse_complex(const std::string& text);
/// Whitespace or comma separated complex entries.
Vector parse_complex_vector(const std::string& text);
/// Rows separated by ';'.
Matrix parse_complex_matrix(const std::string& text);

/// Potential file: kind = zero | constant | sampled | preset, plus
/// dimension, x_max, step, matrix, samples (CSV path) or preset.
PotentialDescription read_potential_description(const std::filesystem::path& path);

/// Generated kinds are stretched to x_max >= cover and use default_step
/// when the file gives no step.
PotentialGrid load_potential(const std::filesystem::path& path, double cover = 0.0, double default_step = 0.0);

std::string format_double(double v);

/// Kernel dump: header, then xi, eta, then the n x n entries of v row-major as re, im.
std::string kernel_csv(const KernelField& field);
void write_kernel_csv(const std::filesystem::path& path, const KernelField& field);
/// Rebuilds the field from a dump produced by write_kernel_csv.
KernelField read_kernel_csv(const std::filesystem::path& path, const PotentialGrid& p);

/// Columns x, then u, u_x, u_xx entries per component as re, im.
std::string snapshot_csv(const WaveSnapshot& s);
void write_snapshot_csv(const std::filesystem::path& path, const WaveSnapshot& s);
/// Reads the u columns of a snapshot CSV (the derivative columns are optional).
SampledFunction read_snapshot_u(const std::filesystem::path& path, std::size_t dimension);

/// Columns t, then entries per component as re, im.
std::string sampled_csv(const SampledFunction& g, const std::string& axis = "t");
void write_sampled_csv(const std::filesystem::path& path, const SampledFunction& g, const std::string& axis = "t");

/// Samples CSV with header: t, then entries as re, im. Uniform in t from 0.
Eigen::MatrixXcd read_control_samples(const std::filesystem::path& path, std::size_t dimension, double& horizon);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace wavekernel::io
