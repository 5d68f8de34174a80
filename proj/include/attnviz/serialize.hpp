// SPDX-License-Identifier: Apache-2.0
//
// Canonical JSON: object keys sorted, floats printed with 6 significant
// digits ("%.6g"), no whitespace. Every JSON body the CLI writes or the
// service returns goes through canonical_dump.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attnviz/engine.hpp"
#include "attnviz/heads.hpp"
#include "attnviz/trace_views.hpp"

namespace attnviz {

using Json = nlohmann::json;

std::string canonical_dump(const Json& value);

Json to_json(const Matrix& m);
Json to_json(const ModelConfig& config, const Thresholds& thresholds);
Json to_json(const NeuronDetail& detail);
Json to_json(const HeadSummary& summary, const HeadThumbnail& thumb);

/// Wire schema: tokens, segments, mode, layers, heads, d_head, attn[L][H][N][N],
/// and q/k [L][H][N][d_head] when `include_qk`.
Json trace_to_json(const AttentionTrace& trace, bool include_qk);
std::string serialize_trace(const AttentionTrace& trace, bool include_qk);

/// Inverse of serialize_trace. Token ids are not on the wire; they are
/// re-derived from `vocab`. Without q/k in the input, q and k are left empty.
AttentionTrace deserialize_trace(std::string_view json, const Vocabulary& vocab = Vocabulary::builtin());

// L x H summaries with max-pooled thumbnails, layer-major.
Json heads_to_json(const AttentionTrace& trace, const Thresholds& thresholds,
                   std::size_t resolution = kDefaultThumbnailResolution);

}  // namespace attnviz
