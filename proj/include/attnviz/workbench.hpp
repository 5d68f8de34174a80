// SPDX-License-Identifier: Apache-2.0
//
// The request layer shared by the CLI and the HTTP service. Both produce
// their output bodies through these functions so a CLI run and an API call
// on the same input are byte-identical.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "attnviz/engine.hpp"
#include "attnviz/heads.hpp"
#include "attnviz/model.hpp"
#include "attnviz/tokenizer.hpp"

namespace attnviz {

struct TextInput {
    std::string text;
    std::optional<std::string> text_b;
};

class Workbench {
public:
    /// `max_request_len` of 0 means the model's max_seq; larger values are rejected.
    Workbench(ModelConfig config, WeightSet weights, Vocabulary vocab = Vocabulary::builtin(),
              Thresholds thresholds = {}, std::size_t max_request_len = 0);

    static Workbench from_files(const std::filesystem::path& model,
                                const std::optional<std::filesystem::path>& vocab = std::nullopt,
                                const std::optional<std::filesystem::path>& thresholds = std::nullopt,
                                std::size_t max_request_len = 0);

    const ModelConfig& config() const noexcept { return config_; }
    const WeightSet& weights() const noexcept { return weights_; }
    const Thresholds& thresholds() const noexcept { return thresholds_; }
    std::size_t max_request_len() const noexcept { return max_request_len_; }

    TokenizedInput tokenize(const TextInput& in) const;
    AttentionTrace trace(const TextInput& in) const;

    std::string model_body() const;
    std::string trace_body(const TextInput& in, bool include_qk) const;
    std::string heads_body(const TextInput& in) const;
    std::string neuron_body(const TextInput& in, std::size_t layer, std::size_t head, std::size_t token) const;

private:
    ModelConfig config_;
    WeightSet weights_;
    Vocabulary vocab_;
    Thresholds thresholds_;
    std::size_t max_request_len_;
};

}  // namespace attnviz
