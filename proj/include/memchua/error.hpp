#pragma once

#include <stdexcept>
#include <string>

namespace memchua {

enum class ErrorKind {
    invalid_argument,
    underdetermined,
    singular,
    infeasible,
    safe_window,
    divergence,
    parse,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind; the CLI maps kinds onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace memchua
