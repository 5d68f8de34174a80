// SPDX-License-Identifier: Apache-2.0
//
// attnviz: generate toy models, dump attention traces, report head metrics,
// and serve the HTTP API. Exit codes: 0 success, 1 environment/IO, 2 user input.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "attnviz/error.hpp"
#include "attnviz/model.hpp"
#include "attnviz/serialize.hpp"
#include "attnviz/service.hpp"
#include "attnviz/workbench.hpp"

namespace {

using namespace attnviz;

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Input:
        case ErrorKind::Mode:
        case ErrorKind::Length:
        case ErrorKind::Vocab:
        case ErrorKind::Bounds:
        case ErrorKind::InsufficientLength:
        case ErrorKind::Domain: return kExitUsage;
        default: return kExitIo;
    }
}

struct CommonInput {
    std::string model;
    std::string text;
    std::optional<std::string> text_b;
    std::optional<std::string> vocab;
    std::optional<std::string> thresholds;
};

void add_common(CLI::App* cmd, CommonInput& in) {
    cmd->add_option("--model", in.model, "Model file (ATNM1)")->required();
    cmd->add_option("--text", in.text, "Input sentence (sentence A)")->required();
    cmd->add_option("--text-b", in.text_b, "Second sentence (bidirectional models only)");
    cmd->add_option("--vocab", in.vocab, "Vocabulary file (default: built-in)");
}

// Model load problems are environment errors (exit 1) whatever their kind.
Workbench load_workbench(const CommonInput& in, std::size_t max_request_len = 0) {
    // A malformed thresholds file is bad user config (exit 2); an unreadable one stays IO.
    if (in.thresholds) {
        try {
            (void)Thresholds::load(*in.thresholds);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Format) throw Error(ErrorKind::Input, e.what());
            throw;
        }
    }
    try {
        return Workbench::from_files(in.model, in.vocab, in.thresholds, max_request_len);
    } catch (const Error& e) {
        throw Error(ErrorKind::Io, e.what());
    }
}

void write_output(const std::optional<std::string>& path, const std::string& body) {
    if (!path || *path == "-") {
        std::cout << body << '\n';
        return;
    }
    std::ofstream out(*path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + *path);
    out << body << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for " + *path);
}

std::string fmt_metric(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

void print_table(const Workbench& wb, const TextInput& in) {
    const AttentionTrace trace = wb.trace(in);
    const auto summaries = summarize(trace, wb.thresholds());
    std::cout << "# thresholds: ";
    const std::string t = wb.thresholds().to_text();
    for (char c : t) std::cout << (c == '\n' ? ';' : c);
    std::cout << '\n';
    std::printf("%-5s %-4s %-8s %-8s %-8s %-8s %-8s %s\n", "layer", "head", "prev", "first", "disp", "decay",
                "inter", "label");
    for (const auto& s : summaries) {
        std::printf("%-5zu %-4zu %-8s %-8s %-8s %-8s %-8s %s\n", s.layer, s.head, fmt_metric(s.prev_token_score).c_str(),
                    fmt_metric(s.first_token_share).c_str(), fmt_metric(s.dispersion).c_str(),
                    fmt_metric(s.decay_slope).c_str(), fmt_metric(s.inter_sentence_fraction).c_str(),
                    std::string(to_string(s.label)).c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attention trace workbench for toy Transformer models"};
    app.require_subcommand(1);

    // gen-model
    ModelConfig cfg;
    std::string mode = "causal";
    std::uint64_t seed = 42;
    std::string model_out;
    auto* gen = app.add_subcommand("gen-model", "Write a synthetic model file");
    gen->add_option("--layers", cfg.n_layers, "Number of layers")->capture_default_str();
    gen->add_option("--heads", cfg.n_heads, "Attention heads per layer")->capture_default_str();
    gen->add_option("--d-model", cfg.d_model, "Model width")->capture_default_str();
    gen->add_option("--d-ff", cfg.d_ff, "MLP hidden width")->capture_default_str();
    gen->add_option("--vocab", cfg.vocab_size, "Vocabulary size")->capture_default_str();
    gen->add_option("--max-seq", cfg.max_seq, "Maximum sequence length")->capture_default_str();
    gen->add_option("--mode", mode, "causal | bidirectional")->capture_default_str();
    gen->add_option("--seed", seed, "Weight seed")->capture_default_str();
    gen->add_option("--out", model_out, "Output path")->required();

    // trace
    CommonInput trace_in;
    bool include_qk = false;
    std::optional<std::string> trace_out;
    auto* trace = app.add_subcommand("trace", "Write the attention trace as canonical JSON");
    add_common(trace, trace_in);
    trace->add_flag("--include-qk", include_qk, "Include query/key vectors");
    trace->add_option("--out", trace_out, "Output path (default: stdout)");

    // heads
    CommonInput heads_in;
    std::string format = "table";
    auto* heads = app.add_subcommand("heads", "Report per-head metrics and labels");
    add_common(heads, heads_in);
    heads->add_option("--format", format, "table | json")->check(CLI::IsMember({"table", "json"}))->capture_default_str();
    heads->add_option("--thresholds", heads_in.thresholds, "Threshold config file");

    // serve
    ServiceConfig serve_cfg;
    std::optional<std::string> serve_thresholds, serve_vocab, static_dir;
    std::string serve_model;
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--model", serve_model, "Model file (ATNM1)")->required();
    serve->add_option("--port", serve_cfg.port, "TCP port (0 picks a free one)")->capture_default_str();
    serve->add_option("--host", serve_cfg.host, "Bind address")->capture_default_str();
    serve->add_option("--static-dir", static_dir, "Directory with the UI bundle, served at /");
    serve->add_option("--max-request-len", serve_cfg.max_request_len, "Token limit per request (default: max_seq)");
    serve->add_option("--thresholds", serve_thresholds, "Threshold config file");
    serve->add_option("--vocab", serve_vocab, "Vocabulary file (default: built-in)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen) {
            cfg.mode = parse_mode(mode);
            cfg.validate();
            save_model(model_out, cfg, generate_synthetic_model(cfg, seed));
            std::cout << "layers=" << cfg.n_layers << " heads=" << cfg.n_heads << " d_model=" << cfg.d_model
                      << " d_head=" << cfg.d_head() << " d_ff=" << cfg.d_ff << " vocab=" << cfg.vocab_size
                      << " max_seq=" << cfg.max_seq << " mode=" << to_string(cfg.mode) << " seed=" << seed << '\n';
            return 0;
        }
        if (*trace) {
            const Workbench wb = load_workbench(trace_in);
            write_output(trace_out, wb.trace_body({trace_in.text, trace_in.text_b}, include_qk));
            return 0;
        }
        if (*heads) {
            const Workbench wb = load_workbench(heads_in);
            const TextInput in{heads_in.text, heads_in.text_b};
            if (format == "json") {
                write_output(std::nullopt, wb.heads_body(in));
            } else {
                print_table(wb, in);
            }
            return 0;
        }
        if (*serve) {
            CommonInput in{serve_model, {}, {}, serve_vocab, serve_thresholds};
            auto wb = std::make_shared<const Workbench>(load_workbench(in, serve_cfg.max_request_len));
            ApiService service(wb);
            std::optional<std::filesystem::path> dir;
            if (static_dir) dir = *static_dir;
            HttpServer server(service, dir);
            const int port = server.bind(serve_cfg.host, serve_cfg.port);
            std::cerr << "listening on http://" << serve_cfg.host << ":" << port << std::endl;
            server.listen();
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
