// SPDX-License-Identifier: Apache-2.0
#include "attnviz/tokenizer.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "attnviz/error.hpp"

namespace attnviz {

// Generated from data/vocab.txt at build time.
extern const char* const kBuiltinVocabText;

namespace {

constexpr std::array<std::string_view, 4> kSpecials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
constexpr std::string_view kPunctuation = ".,;:!?'\"()-";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

Mode parse_mode(std::string_view s) {
    if (s == "causal") return Mode::Causal;
    if (s == "bidirectional") return Mode::Bidirectional;
    throw Error(ErrorKind::Input, "unknown mode '" + std::string(s) + "'");
}

Vocabulary Vocabulary::from_text(std::string_view text) {
    Vocabulary v;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;
        if (line.empty()) throw Error(ErrorKind::Format, "vocabulary: empty line at id " + std::to_string(v.tokens_.size()));
        auto id = static_cast<TokenId>(v.tokens_.size());
        if (!v.ids_.emplace(std::string(line), id).second) {
            throw Error(ErrorKind::Format, "vocabulary: duplicate token '" + std::string(line) + "'");
        }
        v.tokens_.emplace_back(line);
    }
    if (v.tokens_.size() < kSpecials.size()) throw Error(ErrorKind::Format, "vocabulary: missing special tokens");
    for (std::size_t i = 0; i < kSpecials.size(); ++i) {
        if (v.tokens_[i] != kSpecials[i]) {
            throw Error(ErrorKind::Format, "vocabulary: line " + std::to_string(i) + " must be " +
                                               std::string(kSpecials[i]));
        }
    }
    return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open vocabulary " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

const Vocabulary& Vocabulary::builtin() {
    static const Vocabulary v = from_text(kBuiltinVocabText);
    return v;
}

TokenId Vocabulary::lookup(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnkId : it->second;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (char ch : text) {
        if (is_space(ch)) {
            flush();
        } else if (kPunctuation.find(ch) != std::string_view::npos) {
            flush();
            out.emplace_back(1, ch);
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    flush();
    return out;
}

TokenizedInput tokenize(std::string_view text_a, const std::optional<std::string>& text_b,
                        Mode mode, const Vocabulary& vocab, std::size_t max_seq) {
    if (trim(text_a).empty()) throw Error(ErrorKind::Input, "text is empty");
    if (text_b && mode == Mode::Causal) {
        throw Error(ErrorKind::Mode, "a second sentence requires a bidirectional model");
    }

    TokenizedInput out;
    out.mode = mode;
    auto push = [&](std::string display, TokenId id, int segment) {
        out.display.push_back(std::move(display));
        out.ids.push_back(id);
        out.segments.push_back(segment);
    };
    auto push_words = [&](std::string_view text, int segment) {
        for (auto& w : split_words(text)) {
            TokenId id = vocab.lookup(w);
            push(std::move(w), id, segment);
        }
    };

    if (mode == Mode::Causal) {
        push_words(text_a, 0);
    } else {
        push(std::string(kSpecials[kClsId]), kClsId, 0);
        push_words(text_a, 0);
        push(std::string(kSpecials[kSepId]), kSepId, 0);
        if (text_b) {
            if (trim(*text_b).empty()) throw Error(ErrorKind::Input, "text_b is empty");
            push_words(*text_b, 1);
            push(std::string(kSpecials[kSepId]), kSepId, 1);
        }
    }

    if (max_seq != 0 && out.size() > max_seq) {
        throw Error(ErrorKind::Length, "input has " + std::to_string(out.size()) +
                                           " tokens; model max_seq is " + std::to_string(max_seq));
    }
    return out;
}

}  // namespace attnviz
