#pragma once

#include <stdexcept>
#include <string>

namespace hybridcool {

/// Failure categories. The CLI maps these onto distinct exit codes.
enum class ErrorKind {
    domain,        // an operation's precondition does not hold
    config,        // malformed user input
    instability,   // the linearized dynamics are not stable
    convergence,   // a numerical routine did not reach its tolerance
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace hybridcool
