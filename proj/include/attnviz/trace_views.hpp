// SPDX-License-Identifier: Apache-2.0
//
// Derived views over an AttentionTrace: the per-neuron decomposition of one
// query's attention, display filters, and pooled thumbnails.
#pragma once

#include <cstddef>
#include <vector>

#include "attnviz/engine.hpp"

namespace attnviz {

struct NeuronDetail {
    std::size_t layer = 0;
    std::size_t head = 0;
    std::size_t source = 0;
    Vector q;                         // q_i
    std::vector<std::size_t> targets; // allowed(i), ascending
    Matrix keys;                      // [targets x d_head]
    Matrix elementwise;               // row j = q_i * k_j
    Vector dot;                       // q_i . k_j
    Vector scaled;                    // dot / sqrt(d_head)
    Vector softmax_out;               // softmax(scaled)
};

NeuronDetail neuron_detail(const AttentionTrace& trace, std::size_t layer, std::size_t head, std::size_t source);

enum class Segment { A = 0, B = 1 };

/// Which attention lines stay visible. Filters hide entries; they never
/// renormalize the survivors.
struct FilterSpec {
    enum class Kind { All, FromToken, Sentence };
    Kind kind = Kind::All;
    std::size_t token = 0;
    Segment src = Segment::A;
    Segment dst = Segment::A;

    static FilterSpec all() { return {}; }
    static FilterSpec from_token(std::size_t i) { return {Kind::FromToken, i}; }
    static FilterSpec sentence(Segment s, Segment d) { return {Kind::Sentence, 0, s, d}; }
};

Matrix apply_filter(const AttentionTrace& trace, std::size_t layer, std::size_t head, const FilterSpec& filter);

inline constexpr std::size_t kDefaultThumbnailResolution = 16;

struct HeadThumbnail {
    std::size_t layer = 0;
    std::size_t head = 0;
    Matrix grid;  // [R x R], R = min(N, resolution)
};

/// Max-pools alpha onto an R x R grid. Block b spans [b*N/R, (b+1)*N/R).
HeadThumbnail thumbnail(const AttentionTrace& trace, std::size_t layer, std::size_t head,
                        std::size_t resolution = kDefaultThumbnailResolution);
Matrix max_pool(const Matrix& alpha, std::size_t resolution);

}  // namespace attnviz
