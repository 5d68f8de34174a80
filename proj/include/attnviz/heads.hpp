// SPDX-License-Identifier: Apache-2.0
//
// Scalar head-behaviour metrics and a rule-table classifier.
//
// Every metric reads one attention matrix. Bounded metrics lie in [0, 1].
// Metrics that are undefined for a given input (too short, wrong mode) are
// absent from a HeadSummary rather than reported as zero.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attnviz/engine.hpp"

namespace attnviz {

enum class PatternLabel { InterSentence, PositionalPrev, NullFirst, DistanceDecay, Dispersed, Unlabeled };

std::string_view to_string(PatternLabel label);

/// Classifier thresholds. Loaded from flat `key = value` text; `#` starts a comment.
struct Thresholds {
    double inter_sentence = 0.5;          // inter_sentence_fraction >=
    double positional_prev = 0.7;         // prev_token_score >=
    double null_first = 0.6;              // first_token_share >=
    double distance_decay_max_slope = -0.01;      // decay_slope <=
    double distance_decay_min_dispersion = 0.3;   // ... and dispersion >=
    double dispersed = 0.9;               // dispersion >=

    static Thresholds from_text(std::string_view text);
    static Thresholds load(const std::filesystem::path& path);
    std::string to_text() const;

    bool operator==(const Thresholds&) const = default;
};

struct HeadSummary {
    std::size_t layer = 0;
    std::size_t head = 0;
    std::optional<double> prev_token_score;
    double first_token_share = 0.0;
    std::optional<double> dispersion;
    std::optional<double> decay_slope;               // causal only
    std::optional<double> inter_sentence_fraction;   // bidirectional only
    PatternLabel label = PatternLabel::Unlabeled;
};

// Mean of alpha[i][i-1] over i in [1, N). Needs N >= 2.
double prev_token_score(const Matrix& alpha, Mode mode);
// Mean of alpha[i][0].
double first_token_share(const Matrix& alpha);
// Mean normalized entropy over rows with at least two visible targets.
double dispersion(const Matrix& alpha, Mode mode);
// Least-squares slope of alpha[i][j] against distance i - j (j <= i, i >= 1). Causal, N >= 3.
double decay_slope(const Matrix& alpha, Mode mode);
// Share of total attention mass between tokens of different segments. Bidirectional only.
double inter_sentence_fraction(const Matrix& alpha, const std::vector<int>& segments, Mode mode);
double inter_sentence_fraction(const AttentionTrace& trace, std::size_t layer, std::size_t head);

/// First matching rule wins: INTER_SENTENCE, POSITIONAL_PREV, NULL_FIRST,
/// DISTANCE_DECAY, DISPERSED, else UNLABELED. Absent metrics never match.
PatternLabel classify_head(const HeadSummary& summary, const Thresholds& thresholds = {});

HeadSummary summarize_head(const Matrix& alpha, const std::vector<int>& segments, Mode mode,
                           const Thresholds& thresholds = {});
HeadSummary summarize_head(const AttentionTrace& trace, std::size_t layer, std::size_t head,
                           const Thresholds& thresholds = {});
// All heads, layer-major.
std::vector<HeadSummary> summarize(const AttentionTrace& trace, const Thresholds& thresholds = {});

struct RankedHead {
    std::size_t layer;
    std::size_t head;
    double value;
    bool operator==(const RankedHead&) const = default;
};

/// Every head sorted by `metric` descending, ties by (layer, head) ascending.
/// Unknown metric names raise an input error.
std::vector<RankedHead> rank_heads(const AttentionTrace& trace, std::string_view metric);

}  // namespace attnviz
