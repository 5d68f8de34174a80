// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace attnviz {

enum class ErrorKind {
    Shape,
    Domain,
    Input,
    Mode,
    Length,
    Vocab,
    Format,
    Data,
    Bounds,
    InsufficientLength,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` drives HTTP status and
/// CLI exit code mapping.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Name of the offending field for bounds errors ("layer", "head", ...).
    const std::string& field() const noexcept { return field_; }

    static Error bounds(std::string field, std::size_t value, std::size_t limit);

private:
    ErrorKind kind_;
    std::string field_;
};

}  // namespace attnviz
