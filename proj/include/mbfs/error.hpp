#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mbfs {

enum class ErrorKind {
    dimension_mismatch,
    invalid_argument,
    non_finite,
    insufficient_samples,
    parse_error,
    cyclic_graph,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` lets callers
// branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), m_kind(kind) {}

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

}  // namespace mbfs
