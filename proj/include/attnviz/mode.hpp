// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace attnviz {

// Causal: position i sees [0, i]. Bidirectional: every position sees the whole input.
enum class Mode { Causal, Bidirectional };

constexpr std::string_view to_string(Mode m) {
    return m == Mode::Causal ? "causal" : "bidirectional";
}

Mode parse_mode(std::string_view s);

}  // namespace attnviz
