// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "attnviz/model.hpp"
#include "attnviz/tensor.hpp"
#include "attnviz/tokenizer.hpp"

namespace attnviz {

/// Captured attention for one (layer, head).
struct HeadTrace {
    Matrix alpha;  // [N x N], row i = softmax over allowed(i); masked entries exactly 0
    Matrix q;      // [N x d_head]
    Matrix k;      // [N x d_head]

    bool operator==(const HeadTrace&) const = default;
};

struct AttentionTrace {
    TokenizedInput input;
    std::size_t n_layers = 0;
    std::size_t n_heads = 0;
    std::size_t d_head = 0;
    std::vector<HeadTrace> heads;  // layer-major: index = layer * n_heads + head

    Mode mode() const noexcept { return input.mode; }
    std::size_t seq_len() const noexcept { return input.size(); }

    // Throws a bounds error naming "layer" or "head".
    const HeadTrace& at(std::size_t layer, std::size_t head) const;
    HeadTrace& at(std::size_t layer, std::size_t head);

    bool operator==(const AttentionTrace&) const = default;
};

/// Number of key positions visible from query `i`: i + 1 when causal, N otherwise.
inline std::size_t allowed_count(Mode mode, std::size_t i, std::size_t n) {
    return mode == Mode::Causal ? i + 1 : n;
}

/// Runs the pre-layernorm Transformer over `input` and records q, k and the
/// attention weights of every head. Pure; safe to call concurrently on a
/// shared model.
AttentionTrace forward(const ModelConfig& config, const WeightSet& weights, const TokenizedInput& input);

}  // namespace attnviz
