#pragma once

#include <stdexcept>
#include <string>

namespace wavekernel {

/// Malformed or inadmissible input data (bad potential file, non-Hermitian samples, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A query outside the domain a grid or field covers.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// An iterative procedure stopped at its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A linear system whose pivot block is numerically singular.
class SingularError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wavekernel
