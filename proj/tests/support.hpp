// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attnviz/engine.hpp"
#include "attnviz/model.hpp"

namespace testsupport {

inline const nlohmann::json& golden() {
    static const nlohmann::json g = [] {
        std::ifstream in(ATTNVIZ_FIXTURE_DIR "/golden.json");
        return nlohmann::json::parse(in);
    }();
    return g;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 2 layers, 2 heads, d_model 8, d_ff 16, vocab 64, max_seq 16.
inline attnviz::ModelConfig fixture_config(attnviz::Mode mode = attnviz::Mode::Causal) {
    return {2, 2, 8, 16, 64, 16, mode};
}

inline attnviz::TokenizedInput ids_input(std::vector<std::uint32_t> ids, attnviz::Mode mode,
                                         std::vector<int> segments = {}) {
    attnviz::TokenizedInput in;
    in.mode = mode;
    in.ids = std::move(ids);
    in.segments = segments.empty() ? std::vector<int>(in.ids.size(), 0) : std::move(segments);
    for (auto id : in.ids) in.display.push_back("t" + std::to_string(id));
    return in;
}

// Row-stochastic causal uniform: alpha[i][j] = 1/(i+1) for j <= i.
inline attnviz::Matrix causal_uniform(std::size_t n) {
    attnviz::Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = 1.0 / double(i + 1);
    return a;
}

// alpha[i][i-1] = 1, with row 0 on itself.
inline attnviz::Matrix identity_shift(std::size_t n) {
    attnviz::Matrix a(n, n);
    a(0, 0) = 1.0;
    for (std::size_t i = 1; i < n; ++i) a(i, i - 1) = 1.0;
    return a;
}

}  // namespace testsupport
