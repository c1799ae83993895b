#pragma once

#include <stdexcept>
#include <string>

namespace cylfit {

// Process-level error taxonomy. The CLI maps these onto exit codes:
//   usage -> 1, data -> 2, degenerate -> 3.
enum class ErrorKind { usage = 1, data = 2, degenerate = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(ErrorKind::usage, msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

struct DegenerateError : Error {
    explicit DegenerateError(const std::string& msg) : Error(ErrorKind::degenerate, msg) {}
};

// Raised when the axis scatter matrix has a (near-)repeated smallest eigenvalue,
// i.e. more than one direction minimizes the residual and no single axis exists.
struct AmbiguousAxisError : DegenerateError {
    explicit AmbiguousAxisError(const std::string& msg) : DegenerateError(msg) {}
};

} // namespace cylfit
