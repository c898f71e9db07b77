#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fibscat {

enum class ErrorKind {
    configuration,
    dimension,
    domain,
    numerical,
    unsupported_order,
    invariant_violation,
    boundary_breach,
    convergence,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` tells callers how to react
/// (the CLI maps configuration errors to exit 1 and everything else to a
/// per-fiber failure flag).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::unsupported_order: return "unsupported-order";
    case ErrorKind::invariant_violation: return "invariant-violation";
    case ErrorKind::boundary_breach: return "boundary-breach";
    case ErrorKind::convergence: return "convergence";
    }
    return "unknown";
}

}  // namespace fibscat
