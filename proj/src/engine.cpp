// SPDX-License-Identifier: Apache-2.0
#include "attnviz/engine.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "attnviz/error.hpp"

namespace attnviz {

namespace {

void check_input(const ModelConfig& config, const TokenizedInput& input) {
    const std::size_t n = input.size();
    if (n == 0) throw Error(ErrorKind::Input, "input has no tokens");
    if (input.segments.size() != n || input.display.size() != n) {
        throw Error(ErrorKind::Input, "input sequences have different lengths");
    }
    if (input.mode != config.mode) {
        throw Error(ErrorKind::Mode, "input is " + std::string(to_string(input.mode)) + " but model is " +
                                         std::string(to_string(config.mode)));
    }
    if (n > config.max_seq) {
        throw Error(ErrorKind::Length, "input has " + std::to_string(n) + " tokens; model max_seq is " +
                                           std::to_string(config.max_seq));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (input.ids[i] >= config.vocab_size) {
            throw Error(ErrorKind::Vocab, "token id " + std::to_string(input.ids[i]) + " at position " +
                                              std::to_string(i) + " exceeds vocab_size " +
                                              std::to_string(config.vocab_size));
        }
        if (input.segments[i] != 0 && input.segments[i] != 1) {
            throw Error(ErrorKind::Input, "segment ids must be 0 or 1");
        }
    }
}

Matrix layer_norm_rows(const Matrix& x, const Matrix& gamma, const Matrix& beta) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto normed = layer_norm(x.row(r), gamma.row(0), beta.row(0));
        std::copy(normed.begin(), normed.end(), out.row(r).begin());
    }
    return out;
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
    Matrix out = matmul(x, w);
    add_row_bias(out, b.row(0));
    return out;
}

Matrix column_slice(const Matrix& m, std::size_t begin, std::size_t width) {
    Matrix out(m.rows(), width);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < width; ++c) out(r, c) = m(r, begin + c);
    }
    return out;
}

void add_in_place(Matrix& acc, const Matrix& delta) {
    auto a = acc.values();
    auto d = delta.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += d[i];
}

}  // namespace

const HeadTrace& AttentionTrace::at(std::size_t layer, std::size_t head) const {
    if (layer >= n_layers) throw Error::bounds("layer", layer, n_layers);
    if (head >= n_heads) throw Error::bounds("head", head, n_heads);
    return heads[layer * n_heads + head];
}

HeadTrace& AttentionTrace::at(std::size_t layer, std::size_t head) {
    return const_cast<HeadTrace&>(std::as_const(*this).at(layer, head));
}

AttentionTrace forward(const ModelConfig& config, const WeightSet& weights, const TokenizedInput& input) {
    check_input(config, input);
    const std::size_t n = input.size();
    const std::size_t d_model = config.d_model;
    const std::size_t d_head = config.d_head();
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

    Matrix x(n, d_model);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        auto tok = weights.token_embedding.row(input.ids[i]);
        auto pos = weights.position_embedding.row(i);
        for (std::size_t c = 0; c < d_model; ++c) row[c] = tok[c] + pos[c];
        if (config.mode == Mode::Bidirectional) {
            auto seg = weights.segment_embedding.row(static_cast<std::size_t>(input.segments[i]));
            for (std::size_t c = 0; c < d_model; ++c) row[c] += seg[c];
        }
    }

    AttentionTrace trace;
    trace.input = input;
    trace.n_layers = config.n_layers;
    trace.n_heads = config.n_heads;
    trace.d_head = d_head;
    trace.heads.reserve(config.n_layers * config.n_heads);

    for (const auto& lw : weights.layers) {
        const Matrix h = layer_norm_rows(x, lw.ln1_gamma, lw.ln1_beta);
        const Matrix q_all = affine(h, lw.wq, lw.bq);
        const Matrix k_all = affine(h, lw.wk, lw.bk);
        const Matrix v_all = affine(h, lw.wv, lw.bv);

        Matrix context(n, d_model);
        for (std::size_t head = 0; head < config.n_heads; ++head) {
            const std::size_t off = head * d_head;
            HeadTrace ht{Matrix(n, n), column_slice(q_all, off, d_head), column_slice(k_all, off, d_head)};

            Vector scores;
            for (std::size_t i = 0; i < n; ++i) {
                // Masked positions never enter the softmax and stay exactly 0.
                const std::size_t visible = allowed_count(config.mode, i, n);
                scores.assign(visible, 0.0);
                for (std::size_t j = 0; j < visible; ++j) scores[j] = dot(ht.q.row(i), ht.k.row(j)) * scale;
                const Vector probs = softmax(scores);
                std::copy(probs.begin(), probs.end(), ht.alpha.row(i).begin());

                auto ctx = context.row(i);
                for (std::size_t j = 0; j < visible; ++j) {
                    for (std::size_t c = 0; c < d_head; ++c) ctx[off + c] += probs[j] * v_all(j, off + c);
                }
            }
            trace.heads.push_back(std::move(ht));
        }

        add_in_place(x, affine(context, lw.wo, lw.bo));

        const Matrix h2 = layer_norm_rows(x, lw.ln2_gamma, lw.ln2_beta);
        Matrix hidden = affine(h2, lw.w1, lw.b1);
        for (double& v : hidden.values()) v = gelu(v);
        add_in_place(x, affine(hidden, lw.w2, lw.b2));
    }
    return trace;
}

}  // namespace attnviz
