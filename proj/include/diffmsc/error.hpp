#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace diffmsc {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad file syntax, invalid configuration strings, bad parameters.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Mesh violates a structural invariant (degenerate face, index out of range, zero-area vertex).
class MeshError : public Error {
public:
    using Error::Error;
};

/// Eigensolver failure or a kernel value that rules out the requested construction.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual = 0.0)
        : Error(what), residual_(residual)
    {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Inputs that do not belong together: stale caches, hash mismatches, length mismatches.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Collects non-fatal warnings. Functions that may warn take an optional pointer.
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message)
{
    if (diag) diag->warn(std::move(message));
}

} // namespace diffmsc
