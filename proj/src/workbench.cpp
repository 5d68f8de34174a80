// SPDX-License-Identifier: Apache-2.0
#include "attnviz/workbench.hpp"

#include "attnviz/error.hpp"
#include "attnviz/serialize.hpp"
#include "attnviz/trace_views.hpp"

namespace attnviz {

Workbench::Workbench(ModelConfig config, WeightSet weights, Vocabulary vocab, Thresholds thresholds,
                     std::size_t max_request_len)
    : config_(config),
      weights_(std::move(weights)),
      vocab_(std::move(vocab)),
      thresholds_(thresholds),
      max_request_len_(max_request_len == 0 ? config.max_seq : max_request_len) {
    config_.validate();
    if (max_request_len_ > config_.max_seq) {
        throw Error(ErrorKind::Input, "max request length " + std::to_string(max_request_len_) +
                                          " exceeds model max_seq " + std::to_string(config_.max_seq));
    }
}

Workbench Workbench::from_files(const std::filesystem::path& model, const std::optional<std::filesystem::path>& vocab,
                                const std::optional<std::filesystem::path>& thresholds, std::size_t max_request_len) {
    auto [config, weights] = load_model(model);
    return Workbench(config, std::move(weights), vocab ? Vocabulary::load(*vocab) : Vocabulary::builtin(),
                     thresholds ? Thresholds::load(*thresholds) : Thresholds{}, max_request_len);
}

TokenizedInput Workbench::tokenize(const TextInput& in) const {
    return attnviz::tokenize(in.text, in.text_b, config_.mode, vocab_, max_request_len_);
}

AttentionTrace Workbench::trace(const TextInput& in) const { return forward(config_, weights_, tokenize(in)); }

std::string Workbench::model_body() const { return canonical_dump(to_json(config_, thresholds_)); }

std::string Workbench::trace_body(const TextInput& in, bool include_qk) const {
    return serialize_trace(trace(in), include_qk);
}

std::string Workbench::heads_body(const TextInput& in) const {
    return canonical_dump(heads_to_json(trace(in), thresholds_));
}

std::string Workbench::neuron_body(const TextInput& in, std::size_t layer, std::size_t head, std::size_t token) const {
    if (layer >= config_.n_layers) throw Error::bounds("layer", layer, config_.n_layers);
    if (head >= config_.n_heads) throw Error::bounds("head", head, config_.n_heads);
    const AttentionTrace t = trace(in);
    Json j = to_json(neuron_detail(t, layer, head, token));
    j["tokens"] = t.input.display;
    return canonical_dump(j);
}

}  // namespace attnviz
