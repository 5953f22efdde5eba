#pragma once

#include <stdexcept>
#include <string>

namespace hcad {

/// Broad failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
    Config,             // invalid configuration or argument
    MissingDependency,  // an upstream stage output or input file is absent
    Numeric,            // non-finite loss, degenerate covariance, ...
    Format,             // malformed file contents
    Validation,         // well-formed input violating a domain rule
    Io,                 // filesystem failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Validation:
        case ErrorKind::Format:
            return 2;
        case ErrorKind::MissingDependency:
        case ErrorKind::Io:
            return 3;
        case ErrorKind::Numeric:
            return 4;
    }
    return 1;
}

}  // namespace hcad
