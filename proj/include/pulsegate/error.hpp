#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pulsegate {

enum class ErrorKind {
    InvalidArgument,
    InvalidInput,
    InsufficientData,
    DegenerateInput,
    DegenerateCorrelation,
    InvalidTrainingSet,
    EmptyComparison,
    Coverage,
    NumericalFailure,
    Config,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every library failure. The kind is stable and is what
/// the CLI maps onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const char* what) {
    if (!condition) throw Error(kind, what);
}

}  // namespace pulsegate
