#pragma once

#include <stdexcept>
#include <string>

namespace nf {

/// Failure categories surfaced by the library. The CLI maps them to exit codes.
enum class ErrorKind {
    invalid_argument,
    numeric,
    capacity,
    unsupported,
    no_transition,
    envelope_unavailable,
    closure_required,
    truncation,
    schema,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error invalid_argument(const std::string& what) { return {ErrorKind::invalid_argument, what}; }
inline Error numeric_error(const std::string& what) { return {ErrorKind::numeric, what}; }

} // namespace nf
