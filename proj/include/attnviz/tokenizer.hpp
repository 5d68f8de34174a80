// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "attnviz/mode.hpp"

namespace attnviz {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr TokenId kSepId = 3;

/// Word-level vocabulary. Line n of the source text is the token with id n;
/// the first four lines must be [PAD], [UNK], [CLS], [SEP].
class Vocabulary {
public:
    static Vocabulary from_text(std::string_view text);
    static Vocabulary load(const std::filesystem::path& path);
    // The vocabulary shipped in data/vocab.txt, compiled in.
    static const Vocabulary& builtin();

    TokenId lookup(std::string_view token) const;
    const std::string& token(TokenId id) const { return tokens_.at(id); }
    std::size_t size() const noexcept { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

struct TokenizedInput {
    std::vector<std::string> display;
    std::vector<TokenId> ids;
    std::vector<int> segments;  // 0 = sentence A, 1 = sentence B
    Mode mode = Mode::Causal;

    std::size_t size() const noexcept { return ids.size(); }
    bool operator==(const TokenizedInput&) const = default;
};

// Lowercase, whitespace split, each of .,;:!?'"()- as its own token.
std::vector<std::string> split_words(std::string_view text);

/// Tokenizes one sentence (or a sentence pair in bidirectional mode).
/// `max_seq` of 0 disables the length check.
TokenizedInput tokenize(std::string_view text_a, const std::optional<std::string>& text_b,
                        Mode mode, const Vocabulary& vocab, std::size_t max_seq = 0);

}  // namespace attnviz
