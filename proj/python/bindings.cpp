// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "attnviz/error.hpp"
#include "attnviz/heads.hpp"
#include "attnviz/model.hpp"
#include "attnviz/tokenizer.hpp"
#include "attnviz/workbench.hpp"

namespace py = pybind11;
using namespace attnviz;

namespace {

TextInput text_input(std::string text, std::optional<std::string> text_b) {
    return TextInput{std::move(text), std::move(text_b)};
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

}  // namespace

PYBIND11_MODULE(_attnviz, m) {
    m.doc() = "Attention tracing and head analysis for small synthetic transformers";

    // AttnvizError(ValueError) carries .kind and .field from the C++ error.
    py::exception<Error>(m, "AttnvizError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object type = py::module_::import("attnviz._attnviz").attr("AttnvizError");
            py::object exc = type(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            exc.attr("field") = e.field().empty() ? py::object(py::none()) : py::object(py::str(e.field()));
            PyErr_SetObject(type.ptr(), exc.ptr());
        }
    });

    m.def("split_words", &split_words, py::arg("text"));

    m.def(
        "gen_model",
        [](const std::filesystem::path& out, std::size_t layers, std::size_t heads, std::size_t d_model,
           std::size_t d_ff, std::size_t vocab, std::size_t max_seq, const std::string& mode, std::uint64_t seed) {
            ModelConfig cfg;
            cfg.n_layers = layers;
            cfg.n_heads = heads;
            cfg.d_model = d_model;
            cfg.d_ff = d_ff;
            cfg.vocab_size = vocab;
            cfg.max_seq = max_seq;
            cfg.mode = parse_mode(mode);
            cfg.validate();
            save_model(out, cfg, generate_synthetic_model(cfg, seed));
        },
        py::arg("out"), py::kw_only(), py::arg("layers") = 2, py::arg("heads") = 2, py::arg("d_model") = 8,
        py::arg("d_ff") = 16, py::arg("vocab") = 64, py::arg("max_seq") = 16, py::arg("mode") = "causal",
        py::arg("seed") = 42, "Write a seeded synthetic model file.");

    py::class_<Workbench>(m, "Workbench")
        .def(py::init(&Workbench::from_files), py::arg("model"), py::arg("vocab") = std::nullopt,
             py::arg("thresholds") = std::nullopt, py::arg("max_request_len") = 0)
        .def("model_json", &Workbench::model_body)
        .def(
            "tokenize",
            [](const Workbench& wb, std::string text, std::optional<std::string> text_b) {
                const auto t = wb.tokenize(text_input(std::move(text), std::move(text_b)));
                py::dict d;
                d["display"] = t.display;
                d["ids"] = std::vector<std::size_t>(t.ids.begin(), t.ids.end());
                d["segments"] = t.segments;
                d["mode"] = std::string(to_string(t.mode));
                return d;
            },
            py::arg("text"), py::arg("text_b") = std::nullopt)
        .def(
            "trace_json",
            [](const Workbench& wb, std::string text, std::optional<std::string> text_b, bool include_qk) {
                return wb.trace_body(text_input(std::move(text), std::move(text_b)), include_qk);
            },
            py::arg("text"), py::arg("text_b") = std::nullopt, py::arg("include_qk") = false)
        .def(
            "heads_json",
            [](const Workbench& wb, std::string text, std::optional<std::string> text_b) {
                return wb.heads_body(text_input(std::move(text), std::move(text_b)));
            },
            py::arg("text"), py::arg("text_b") = std::nullopt)
        .def(
            "neuron_json",
            [](const Workbench& wb, std::string text, std::size_t layer, std::size_t head, std::size_t token,
               std::optional<std::string> text_b) {
                return wb.neuron_body(text_input(std::move(text), std::move(text_b)), layer, head, token);
            },
            py::arg("text"), py::arg("layer"), py::arg("head"), py::arg("token"), py::arg("text_b") = std::nullopt)
        .def(
            "alpha",
            [](const Workbench& wb, std::string text, std::size_t layer, std::size_t head,
               std::optional<std::string> text_b) {
                const auto trace = wb.trace(text_input(std::move(text), std::move(text_b)));
                return rows_of(trace.at(layer, head).alpha);
            },
            py::arg("text"), py::arg("layer"), py::arg("head"), py::arg("text_b") = std::nullopt,
            "Attention weights of one head as a list of rows.")
        .def(
            "rank_heads",
            [](const Workbench& wb, std::string text, const std::string& metric, std::optional<std::string> text_b) {
                const auto trace = wb.trace(text_input(std::move(text), std::move(text_b)));
                std::vector<std::tuple<std::size_t, std::size_t, double>> out;
                for (const auto& r : rank_heads(trace, metric)) out.emplace_back(r.layer, r.head, r.value);
                return out;
            },
            py::arg("text"), py::arg("metric"), py::arg("text_b") = std::nullopt,
            "(layer, head, value) sorted by descending metric.");
}
