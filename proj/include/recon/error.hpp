#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace recon {

/// Thrown when an argument violates a documented precondition (shape, range,
/// finiteness).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a numerical method fails (divergence, breakdown, singularity).
/// Carries whatever objective trace was accumulated before the failure.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, std::vector<double> trace = {})
        : std::runtime_error(what), trace_(std::move(trace)) {}

    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ValidationError(message);
}

} // namespace recon
