// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Usage: attnviz_acceptance <path-to-attnviz-cli>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "attnviz/engine.hpp"
#include "attnviz/error.hpp"
#include "attnviz/heads.hpp"
#include "attnviz/serialize.hpp"
#include "attnviz/service.hpp"
#include "attnviz/trace_views.hpp"
#include "oracle/forward_oracle.hpp"
#include "support.hpp"

using namespace attnviz;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

TokenizedInput random_input(std::mt19937_64& rng, const ModelConfig& cfg, std::size_t n) {
    std::vector<std::uint32_t> ids(n);
    for (auto& id : ids) id = static_cast<std::uint32_t>(rng() % cfg.vocab_size);
    std::vector<int> seg(n, 0);
    if (cfg.mode == Mode::Bidirectional)
        for (std::size_t i = (n + 1) / 2; i < n; ++i) seg[i] = 1;
    return testsupport::ids_input(ids, cfg.mode, seg);
}

ModelConfig random_config(std::mt19937_64& rng, std::size_t max_layers, std::size_t max_heads, std::size_t max_dhead) {
    ModelConfig c;
    c.n_layers = 1 + rng() % max_layers;
    c.n_heads = 1 + rng() % max_heads;
    c.d_model = c.n_heads * (1 + rng() % max_dhead);
    c.d_ff = 2 * c.d_model;
    c.vocab_size = 64;
    c.max_seq = 6;
    c.mode = rng() % 2 ? Mode::Bidirectional : Mode::Causal;
    return c;
}

AttentionTrace pair_trace() {
    const auto cfg = testsupport::fixture_config(Mode::Bidirectional);
    return forward(cfg, generate_synthetic_model(cfg, 42),
                   tokenize("the cat sat on the mat", std::string("the cat lay on the rug"), Mode::Bidirectional,
                            Vocabulary::builtin()));
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(20240501);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int c = 0; c < 50; ++c) {
        const auto cfg = random_config(rng, 2, 2, 4);
        const auto w = generate_synthetic_model(cfg, rng());
        const auto in = random_input(rng, cfg, 1 + rng() % 6);
        const auto trace = forward(cfg, w, in);
        const auto ref = oracle::forward_alpha(cfg, w, in.ids, in.segments);
        for (std::size_t l = 0; l < cfg.n_layers; ++l)
            for (std::size_t h = 0; h < cfg.n_heads; ++h)
                for (std::size_t i = 0; i < in.size(); ++i)
                    for (std::size_t j = 0; j < in.size(); ++j)
                        worst = std::max(worst, std::abs(trace.at(l, h).alpha(i, j) - ref[l][h][i][j]));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-5 && secs < 5.0, fmt("max |diff| %.3g (tol 1e-5), %.3f s (limit 5 s)", worst, secs)};
}

Outcome row_stochastic() {
    std::mt19937_64 rng(77);
    double worst_sum = 0.0;
    std::size_t mask_violations = 0, nonpositive = 0, out_of_unit = 0;
    for (int c = 0; c < 100; ++c) {
        auto cfg = random_config(rng, 2, 3, 4);
        cfg.max_seq = 12;
        const auto trace = forward(cfg, generate_synthetic_model(cfg, rng()), random_input(rng, cfg, 1 + rng() % 12));
        const std::size_t n = trace.seq_len();
        for (const auto& ht : trace.heads)
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double a = ht.alpha(i, j);
                    sum += a;
                    if (a < 0.0 || a > 1.0) ++out_of_unit;
                    if (cfg.mode == Mode::Causal && j > i && a != 0.0) ++mask_violations;
                    if (cfg.mode == Mode::Bidirectional && !(a > 0.0)) ++nonpositive;
                }
                worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
            }
    }
    return {worst_sum <= 1e-5 && mask_violations == 0 && nonpositive == 0 && out_of_unit == 0,
            fmt("max |row sum - 1| %.3g, masked nonzeros %zu, bidirectional non-positive %zu", worst_sum,
                mask_violations, nonpositive)};
}

Outcome neuron_identity() {
    const auto cfg = testsupport::fixture_config();
    const auto w = generate_synthetic_model(cfg, 42);
    std::vector<AttentionTrace> traces = {
        forward(cfg, w, testsupport::ids_input({5, 9, 5, 11}, Mode::Causal)),
        forward(cfg, w, tokenize("The quick, brown fox jumps over the lazy", std::nullopt, Mode::Causal,
                                 Vocabulary::builtin())),
        pair_trace()};
    double worst_dot = 0, worst_soft = 0;
    std::size_t checked = 0;
    for (const auto& t : traces)
        for (std::size_t l = 0; l < t.n_layers; ++l)
            for (std::size_t h = 0; h < t.n_heads; ++h)
                for (std::size_t i = 0; i < t.seq_len(); ++i) {
                    const auto nd = neuron_detail(t, l, h, i);
                    for (std::size_t j = 0; j < nd.targets.size(); ++j) {
                        double s = 0;
                        for (double v : nd.elementwise.row(j)) s += v;
                        worst_dot = std::max(worst_dot, std::abs(s - nd.dot[j]));
                        worst_soft = std::max(worst_soft, std::abs(nd.softmax_out[j] - t.at(l, h).alpha(i, j)));
                    }
                    ++checked;
                }
    return {worst_dot <= 1e-5 && worst_soft <= 1e-6,
            fmt("%zu queries; max dot gap %.3g (tol 1e-5), max softmax gap %.3g (tol 1e-6)", checked, worst_dot,
                worst_soft)};
}

Outcome enumeration_384() {
    const auto t0 = Clock::now();
    const ModelConfig cfg{24, 16, 64, 128, 64, 16, Mode::Causal};
    auto wb = std::make_shared<const Workbench>(cfg, generate_synthetic_model(cfg, 42));
    const TextInput in{"the quick brown fox jumps over the lazy dog .", std::nullopt};
    const auto trace = wb->trace(in);
    std::size_t matrices = 0, thumbs = 0;
    for (std::size_t l = 0; l < cfg.n_layers; ++l)
        for (std::size_t h = 0; h < cfg.n_heads; ++h) {
            if (trace.at(l, h).alpha.rows() == 10) ++matrices;
            if (thumbnail(trace, l, h).grid.rows() == 10) ++thumbs;
        }
    ApiService svc(wb);
    const auto r = svc.handle("POST", "/api/heads", R"({"text":"the quick brown fox jumps over the lazy dog ."})");
    const std::size_t summaries = r.status == 200 ? Json::parse(r.body).size() : 0;
    const double secs = seconds_since(t0);
    return {trace.seq_len() == 10 && matrices == 384 && thumbs == 384 && summaries == 384 && secs < 10.0,
            fmt("N=%zu, %zu matrices, %zu thumbnails, %zu summaries, %.3f s (limit 10 s)", trace.seq_len(), matrices,
                thumbs, summaries, secs)};
}

Outcome filter_partition() {
    const auto t = pair_trace();
    const Segment segs[] = {Segment::A, Segment::B};
    std::size_t mismatches = 0;
    for (std::size_t l = 0; l < t.n_layers; ++l)
        for (std::size_t h = 0; h < t.n_heads; ++h) {
            Matrix sum(t.seq_len(), t.seq_len());
            for (Segment s : segs)
                for (Segment d : segs) {
                    const auto m = apply_filter(t, l, h, FilterSpec::sentence(s, d));
                    for (std::size_t k = 0; k < m.size(); ++k) sum.values()[k] += m.values()[k];
                }
            const auto& alpha = t.at(l, h).alpha;
            for (std::size_t k = 0; k < sum.size(); ++k)
                if (sum.values()[k] != alpha.values()[k]) ++mismatches;
        }
    return {mismatches == 0, fmt("%zu bitwise mismatches over %zu heads", mismatches, t.heads.size())};
}

Outcome classifier_fixtures() {
    const std::vector<int> none;
    Matrix col0(8, 8);
    for (std::size_t i = 0; i < 8; ++i) col0(i, 0) = 1.0;
    // Sentence A = tokens 0..3, sentence B = 4..7; every row puts all mass on the other sentence.
    std::vector<int> seg = {0, 0, 0, 0, 1, 1, 1, 1};
    Matrix cross(8, 8);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            if (seg[i] != seg[j]) cross(i, j) = 0.25;

    const auto shift = summarize_head(testsupport::identity_shift(8), none, Mode::Causal).label;
    const auto first = summarize_head(col0, none, Mode::Causal).label;
    const auto uniform = summarize_head(testsupport::causal_uniform(16), none, Mode::Causal).label;
    const auto inter = summarize_head(cross, seg, Mode::Bidirectional).label;
    const bool ok = shift == PatternLabel::PositionalPrev && first == PatternLabel::NullFirst &&
                    uniform == PatternLabel::Dispersed && inter == PatternLabel::InterSentence;
    return {ok, fmt("identity-shift %s, column-0 %s, causal-uniform(N=16) %s, cross-segment %s",
                    std::string(to_string(shift)).c_str(), std::string(to_string(first)).c_str(),
                    std::string(to_string(uniform)).c_str(), std::string(to_string(inter)).c_str())};
}

int run(const std::string& cmd) {
    const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome determinism(const std::string& cli) {
    const fs::path dir = fs::temp_directory_path() / "attnviz_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string model = (dir / "model.atnm").string();
    const std::string text = "The quick, brown fox jumps over the lazy";
    int rc = run(cli + " gen-model --layers 2 --heads 2 --d-model 8 --seed 42 --out " + model);
    rc |= run(cli + " trace --model " + model + " --text '" + text + "' --include-qk --out " + (dir / "a.json").string());
    rc |= run(cli + " trace --model " + model + " --text '" + text + "' --include-qk --out " + (dir / "b.json").string());
    const std::string a = testsupport::read_file((dir / "a.json").string());
    const std::string b = testsupport::read_file((dir / "b.json").string());

    ApiService svc(std::make_shared<const Workbench>(Workbench::from_files(model)));
    const auto api = svc.handle("POST", "/api/trace", canonical_dump(Json{{"text", text}, {"include_qk", true}}));
    const auto api2 = svc.handle("POST", "/api/trace", canonical_dump(Json{{"text", text}, {"include_qk", true}}));
    fs::remove_all(dir);
    const bool ok = rc == 0 && !a.empty() && a == b && a == api.body + "\n" && api.body == api2.body;
    return {ok, fmt("cli exit %d, %zu bytes, run1==run2 %d, cli==api %d", rc, a.size(), int(a == b),
                    int(a == api.body + "\n"))};
}

Outcome error_contract(const std::string& cli) {
    const auto cfg = testsupport::fixture_config();
    ApiService svc(std::make_shared<const Workbench>(cfg, generate_synthetic_model(cfg, 42)));
    const auto empty = svc.handle("POST", "/api/trace", R"({"text":""})");
    const auto layer = svc.handle("POST", "/api/neuron", R"({"text":"the cat","layer":2,"head":0,"token_index":0})");
    std::string long_text;
    for (int i = 0; i < 17; ++i) long_text += "cat ";
    const auto too_long = svc.handle("POST", "/api/trace", canonical_dump(Json{{"text", long_text}}));

    const fs::path dir = fs::temp_directory_path() / "attnviz_acceptance_err";
    fs::create_directories(dir);
    const std::string model = (dir / "model.atnm").string();
    run(cli + " gen-model --out " + model);
    const int cli_empty = run(cli + " trace --model " + model + " --text ''");
    fs::remove_all(dir);

    const Json layer_body = Json::parse(layer.body);
    const bool names_layer = layer_body.value("field", "") == "layer" &&
                             layer_body["detail"].get<std::string>().find("layer") != std::string::npos;
    const bool ok = empty.status == 400 && cli_empty == 2 && layer.status == 404 && names_layer &&
                    too_long.status == 413;
    return {ok, fmt("empty text %d / cli exit %d, layer out of range %d (names layer: %d), over-length %d",
                    empty.status, cli_empty, layer.status, int(names_layer), too_long.status)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: " << argv[0] << " <attnviz-cli>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"oracle equivalence (50 random models)", oracle_equivalence},
        {"row-stochasticity and masking (100 traces)", row_stochastic},
        {"neuron decomposition identity", neuron_identity},
        {"384 attention structures (24x16)", enumeration_384},
        {"sentence filter partition", filter_partition},
        {"classifier fixtures", classifier_fixtures},
        {"end-to-end determinism (CLI vs API)", [&] { return determinism(cli); }},
        {"error contract", [&] { return error_contract(cli); }},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << '\n';
        failed += o.pass ? 0 : 1;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
