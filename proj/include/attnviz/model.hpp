// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "attnviz/mode.hpp"
#include "attnviz/tensor.hpp"

namespace attnviz {

struct ModelConfig {
    std::size_t n_layers = 2;
    std::size_t n_heads = 2;
    std::size_t d_model = 8;
    std::size_t d_ff = 16;
    std::size_t vocab_size = 64;
    std::size_t max_seq = 16;
    Mode mode = Mode::Causal;

    std::size_t d_head() const noexcept { return n_heads == 0 ? 0 : d_model / n_heads; }

    // Throws ErrorKind::Input naming the violated constraint.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

struct LayerWeights {
    Matrix ln1_gamma, ln1_beta;  // [1 x d_model]
    Matrix wq, bq, wk, bk, wv, bv, wo, bo;
    Matrix ln2_gamma, ln2_beta;
    Matrix w1, b1;  // [d_model x d_ff], [1 x d_ff]
    Matrix w2, b2;  // [d_ff x d_model], [1 x d_model]

    bool operator==(const LayerWeights&) const = default;
};

struct WeightSet {
    Matrix token_embedding;     // [vocab_size x d_model]
    Matrix position_embedding;  // [max_seq x d_model]
    Matrix segment_embedding;   // [2 x d_model], bidirectional only (empty otherwise)
    std::vector<LayerWeights> layers;
    Matrix final_ln_gamma, final_ln_beta;

    bool operator==(const WeightSet&) const = default;
};

/// Expected (name, rows, cols) for every tensor, in file order.
struct TensorSpec {
    std::string name;
    std::size_t rows;
    std::size_t cols;
};
std::vector<TensorSpec> tensor_layout(const ModelConfig& config);

// Visits every tensor of `weights` in file order as (name, Matrix&).
template <typename W, typename Fn>
    requires std::is_same_v<std::remove_const_t<W>, WeightSet>
void for_each_tensor(const ModelConfig& config, W& weights, Fn&& fn) {
    fn(std::string("token_embedding"), weights.token_embedding);
    fn(std::string("position_embedding"), weights.position_embedding);
    if (config.mode == Mode::Bidirectional) fn(std::string("segment_embedding"), weights.segment_embedding);
    for (std::size_t l = 0; l < weights.layers.size(); ++l) {
        auto& lw = weights.layers[l];
        const std::string p = "layers." + std::to_string(l) + ".";
        fn(p + "ln1.gamma", lw.ln1_gamma);
        fn(p + "ln1.beta", lw.ln1_beta);
        fn(p + "Wq", lw.wq);
        fn(p + "bq", lw.bq);
        fn(p + "Wk", lw.wk);
        fn(p + "bk", lw.bk);
        fn(p + "Wv", lw.wv);
        fn(p + "bv", lw.bv);
        fn(p + "Wo", lw.wo);
        fn(p + "bo", lw.bo);
        fn(p + "ln2.gamma", lw.ln2_gamma);
        fn(p + "ln2.beta", lw.ln2_beta);
        fn(p + "W1", lw.w1);
        fn(p + "b1", lw.b1);
        fn(p + "W2", lw.w2);
        fn(p + "b2", lw.b2);
    }
    fn(std::string("final_ln.gamma"), weights.final_ln_gamma);
    fn(std::string("final_ln.beta"), weights.final_ln_beta);
}

/// Fills every tensor from its own splitmix64 stream, seeded with
/// seed ^ fnv1a64(tensor name). Each draw u maps to -0.1 + 0.2 * (u >> 11) * 2^-53,
/// rounded to float32, so the result is bit-reproducible everywhere.
WeightSet generate_synthetic_model(const ModelConfig& config, std::uint64_t seed);

// Binary model file ("ATNM1\0" + header + named float32 tensor blocks).
std::vector<std::uint8_t> encode_model(const ModelConfig& config, const WeightSet& weights);
std::pair<ModelConfig, WeightSet> decode_model(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const ModelConfig& config, const WeightSet& weights);
std::pair<ModelConfig, WeightSet> load_model(const std::filesystem::path& path);

}  // namespace attnviz
