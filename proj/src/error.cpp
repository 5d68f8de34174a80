// SPDX-License-Identifier: Apache-2.0
#include "attnviz/error.hpp"

namespace attnviz {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Shape: return "shape_error";
        case ErrorKind::Domain: return "domain_error";
        case ErrorKind::Input: return "input_error";
        case ErrorKind::Mode: return "mode_error";
        case ErrorKind::Length: return "length_error";
        case ErrorKind::Vocab: return "vocab_error";
        case ErrorKind::Format: return "format_error";
        case ErrorKind::Data: return "data_error";
        case ErrorKind::Bounds: return "out_of_range";
        case ErrorKind::InsufficientLength: return "insufficient_length";
        case ErrorKind::Io: return "io_error";
    }
    return "error";
}

Error Error::bounds(std::string field, std::size_t value, std::size_t limit) {
    Error e(ErrorKind::Bounds, field + " " + std::to_string(value) + " out of range [0, " +
                                   std::to_string(limit) + ")");
    e.field_ = std::move(field);
    return e;
}

}  // namespace attnviz
