// SPDX-License-Identifier: Apache-2.0
#include "attnviz/serialize.hpp"

#include <cmath>
#include <cstdio>

#include "attnviz/error.hpp"

namespace attnviz {

namespace {

void dump_into(const Json& v, std::string& out) {
    switch (v.type()) {
        case Json::value_t::object: {
            out.push_back('{');
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {  // std::map storage: keys already sorted
                if (!first) out.push_back(',');
                first = false;
                out += Json(it.key()).dump();
                out.push_back(':');
                dump_into(it.value(), out);
            }
            out.push_back('}');
            break;
        }
        case Json::value_t::array: {
            out.push_back('[');
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out.push_back(',');
                dump_into(v[i], out);
            }
            out.push_back(']');
            break;
        }
        case Json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) throw Error(ErrorKind::Data, "cannot serialize a non-finite number");
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", d);
            out += buf;
            break;
        }
        default:
            out += v.dump();
    }
}

Json rows_to_json(const Matrix& m, std::size_t rows) {
    Json out = Json::array();
    for (std::size_t r = 0; r < rows; ++r) {
        Json row = Json::array();
        for (double v : m.row(r)) row.push_back(v);
        out.push_back(std::move(row));
    }
    return out;
}

Matrix matrix_from_json(const Json& j, std::size_t rows, std::size_t cols, const char* what) {
    if (!j.is_array() || j.size() != rows) throw Error(ErrorKind::Format, std::string(what) + ": wrong row count");
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const Json& row = j[r];
        if (!row.is_array() || row.size() != cols) throw Error(ErrorKind::Format, std::string(what) + ": wrong column count");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
    }
    return m;
}

}  // namespace

std::string canonical_dump(const Json& value) {
    std::string out;
    dump_into(value, out);
    return out;
}

Json to_json(const Matrix& m) { return rows_to_json(m, m.rows()); }

Json to_json(const ModelConfig& c, const Thresholds& t) {
    return Json{
        {"layers", c.n_layers},
        {"heads", c.n_heads},
        {"d_model", c.d_model},
        {"d_head", c.d_head()},
        {"d_ff", c.d_ff},
        {"mode", std::string(to_string(c.mode))},
        {"vocab_size", c.vocab_size},
        {"max_seq", c.max_seq},
        {"thresholds",
         {{"inter_sentence", t.inter_sentence},
          {"positional_prev", t.positional_prev},
          {"null_first", t.null_first},
          {"distance_decay.max_slope", t.distance_decay_max_slope},
          {"distance_decay.min_dispersion", t.distance_decay_min_dispersion},
          {"dispersed", t.dispersed}}},
    };
}

Json to_json(const NeuronDetail& d) {
    return Json{
        {"layer", d.layer},
        {"head", d.head},
        {"token_index", d.source},
        {"targets", d.targets},
        {"q", d.q},
        {"k", to_json(d.keys)},
        {"elementwise", to_json(d.elementwise)},
        {"dot", d.dot},
        {"scaled", d.scaled},
        {"softmax", d.softmax_out},
    };
}

Json to_json(const HeadSummary& s, const HeadThumbnail& thumb) {
    Json j{
        {"layer", s.layer},
        {"head", s.head},
        {"first_token_share", s.first_token_share},
        {"label", std::string(to_string(s.label))},
        {"thumbnail", to_json(thumb.grid)},
    };
    if (s.prev_token_score) j["prev_token_score"] = *s.prev_token_score;
    if (s.dispersion) j["dispersion"] = *s.dispersion;
    if (s.decay_slope) j["decay_slope"] = *s.decay_slope;
    if (s.inter_sentence_fraction) j["inter_sentence_fraction"] = *s.inter_sentence_fraction;
    return j;
}

Json trace_to_json(const AttentionTrace& trace, bool include_qk) {
    Json attn = Json::array(), q = Json::array(), k = Json::array();
    for (std::size_t l = 0; l < trace.n_layers; ++l) {
        Json la = Json::array(), lq = Json::array(), lk = Json::array();
        for (std::size_t h = 0; h < trace.n_heads; ++h) {
            const HeadTrace& ht = trace.at(l, h);
            la.push_back(to_json(ht.alpha));
            if (include_qk) {
                lq.push_back(to_json(ht.q));
                lk.push_back(to_json(ht.k));
            }
        }
        attn.push_back(std::move(la));
        q.push_back(std::move(lq));
        k.push_back(std::move(lk));
    }
    Json j{
        {"tokens", trace.input.display},
        {"segments", trace.input.segments},
        {"mode", std::string(to_string(trace.mode()))},
        {"layers", trace.n_layers},
        {"heads", trace.n_heads},
        {"d_head", trace.d_head},
        {"attn", std::move(attn)},
    };
    if (include_qk) {
        j["q"] = std::move(q);
        j["k"] = std::move(k);
    }
    return j;
}

std::string serialize_trace(const AttentionTrace& trace, bool include_qk) {
    return canonical_dump(trace_to_json(trace, include_qk));
}

AttentionTrace deserialize_trace(std::string_view text, const Vocabulary& vocab) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Format, "trace: not a JSON object");
    try {
        AttentionTrace t;
        t.input.display = j.at("tokens").get<std::vector<std::string>>();
        t.input.segments = j.at("segments").get<std::vector<int>>();
        t.input.mode = parse_mode(j.at("mode").get<std::string>());
        for (const auto& tok : t.input.display) t.input.ids.push_back(vocab.lookup(tok));
        t.n_layers = j.at("layers").get<std::size_t>();
        t.n_heads = j.at("heads").get<std::size_t>();
        t.d_head = j.at("d_head").get<std::size_t>();
        const std::size_t n = t.input.display.size();
        if (t.input.segments.size() != n) throw Error(ErrorKind::Format, "trace: tokens/segments length mismatch");
        const Json& attn = j.at("attn");
        const bool has_qk = j.contains("q") && j.contains("k");
        if (attn.size() != t.n_layers) throw Error(ErrorKind::Format, "trace: attn layer count mismatch");
        for (std::size_t l = 0; l < t.n_layers; ++l) {
            if (attn[l].size() != t.n_heads) throw Error(ErrorKind::Format, "trace: attn head count mismatch");
            for (std::size_t h = 0; h < t.n_heads; ++h) {
                HeadTrace ht;
                ht.alpha = matrix_from_json(attn[l][h], n, n, "attn");
                if (has_qk) {
                    ht.q = matrix_from_json(j["q"].at(l).at(h), n, t.d_head, "q");
                    ht.k = matrix_from_json(j["k"].at(l).at(h), n, t.d_head, "k");
                }
                t.heads.push_back(std::move(ht));
            }
        }
        return t;
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::Format, std::string("trace: ") + e.what());
    }
}

Json heads_to_json(const AttentionTrace& trace, const Thresholds& thresholds, std::size_t resolution) {
    Json out = Json::array();
    for (const HeadSummary& s : summarize(trace, thresholds)) {
        out.push_back(to_json(s, thumbnail(trace, s.layer, s.head, resolution)));
    }
    return out;
}

}  // namespace attnviz
