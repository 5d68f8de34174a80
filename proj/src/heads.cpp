// SPDX-License-Identifier: Apache-2.0
#include "attnviz/heads.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "attnviz/error.hpp"

namespace attnviz {

namespace {

void require_square(const Matrix& alpha) {
    if (alpha.rows() != alpha.cols()) throw Error(ErrorKind::Shape, "attention matrix " + alpha.shape_string() + " is not square");
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::string_view to_string(PatternLabel label) {
    switch (label) {
        case PatternLabel::InterSentence: return "INTER_SENTENCE";
        case PatternLabel::PositionalPrev: return "POSITIONAL_PREV";
        case PatternLabel::NullFirst: return "NULL_FIRST";
        case PatternLabel::DistanceDecay: return "DISTANCE_DECAY";
        case PatternLabel::Dispersed: return "DISPERSED";
        case PatternLabel::Unlabeled: return "UNLABELED";
    }
    return "UNLABELED";
}

Thresholds Thresholds::from_text(std::string_view text) {
    Thresholds t;
    const std::map<std::string, double*, std::less<>> keys = {
        {"inter_sentence", &t.inter_sentence},
        {"positional_prev", &t.positional_prev},
        {"null_first", &t.null_first},
        {"distance_decay.max_slope", &t.distance_decay_max_slope},
        {"distance_decay.min_dispersion", &t.distance_decay_min_dispersion},
        {"dispersed", &t.dispersed},
    };
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::Format, "thresholds line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        auto it = keys.find(key);
        if (it == keys.end()) {
            throw Error(ErrorKind::Format, "thresholds line " + std::to_string(line_no) + ": unknown key '" +
                                               std::string(key) + "'");
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v)) {
            throw Error(ErrorKind::Format, "thresholds line " + std::to_string(line_no) + ": bad number '" +
                                               std::string(value) + "'");
        }
        *it->second = v;
    }
    return t;
}

Thresholds Thresholds::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open thresholds " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

std::string Thresholds::to_text() const {
    std::ostringstream out;
    out << "inter_sentence = " << inter_sentence << '\n'
        << "positional_prev = " << positional_prev << '\n'
        << "null_first = " << null_first << '\n'
        << "distance_decay.max_slope = " << distance_decay_max_slope << '\n'
        << "distance_decay.min_dispersion = " << distance_decay_min_dispersion << '\n'
        << "dispersed = " << dispersed << '\n';
    return out.str();
}

double prev_token_score(const Matrix& alpha, Mode) {
    require_square(alpha);
    const std::size_t n = alpha.rows();
    if (n < 2) throw Error(ErrorKind::InsufficientLength, "prev_token_score needs at least 2 tokens");
    double sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) sum += alpha(i, i - 1);
    return sum / static_cast<double>(n - 1);
}

double first_token_share(const Matrix& alpha) {
    require_square(alpha);
    const std::size_t n = alpha.rows();
    if (n == 0) throw Error(ErrorKind::InsufficientLength, "first_token_share needs at least 1 token");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += alpha(i, 0);
    return sum / static_cast<double>(n);
}

double dispersion(const Matrix& alpha, Mode mode) {
    require_square(alpha);
    const std::size_t n = alpha.rows();
    double total = 0.0;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t count = allowed_count(mode, i, n);
        if (count < 2) continue;
        // 1 - KL(p || uniform) / ln(count): same value as normalized entropy, but a
        // uniform row cancels to exactly 1 and a one-hot row to exactly 0.
        const double width = static_cast<double>(count);
        double kl = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            const double p = alpha(i, j);
            if (p > 0.0) kl += p * std::log(p * width);
        }
        total += std::clamp(1.0 - std::max(kl, 0.0) / std::log(width), 0.0, 1.0);
        ++rows;
    }
    if (rows == 0) throw Error(ErrorKind::InsufficientLength, "dispersion needs a row with at least 2 targets");
    return total / static_cast<double>(rows);
}

double decay_slope(const Matrix& alpha, Mode mode) {
    require_square(alpha);
    if (mode != Mode::Causal) throw Error(ErrorKind::Mode, "decay_slope is defined for causal traces only");
    const std::size_t n = alpha.rows();
    if (n < 3) throw Error(ErrorKind::InsufficientLength, "decay_slope needs at least 3 tokens");
    double sx = 0.0, sy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            sx += static_cast<double>(i - j);
            sy += alpha(i, j);
            ++count;
        }
    }
    const double mx = sx / static_cast<double>(count);
    const double my = sy / static_cast<double>(count);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double dx = static_cast<double>(i - j) - mx;
            sxy += dx * (alpha(i, j) - my);
            sxx += dx * dx;
        }
    }
    return sxy / sxx;
}

double inter_sentence_fraction(const Matrix& alpha, const std::vector<int>& segments, Mode mode) {
    require_square(alpha);
    if (mode != Mode::Bidirectional) {
        throw Error(ErrorKind::Mode, "inter_sentence_fraction is defined for bidirectional traces only");
    }
    const std::size_t n = alpha.rows();
    if (segments.size() != n) throw Error(ErrorKind::Shape, "segment count does not match attention size");
    double cross = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            total += alpha(i, j);
            if (segments[i] != segments[j]) cross += alpha(i, j);
        }
    }
    if (total <= 0.0) return 0.0;
    return std::clamp(cross / total, 0.0, 1.0);
}

double inter_sentence_fraction(const AttentionTrace& trace, std::size_t layer, std::size_t head) {
    return inter_sentence_fraction(trace.at(layer, head).alpha, trace.input.segments, trace.mode());
}

PatternLabel classify_head(const HeadSummary& s, const Thresholds& t) {
    auto at_least = [](const std::optional<double>& v, double bound) { return v && *v >= bound; };
    if (at_least(s.inter_sentence_fraction, t.inter_sentence)) return PatternLabel::InterSentence;
    if (at_least(s.prev_token_score, t.positional_prev)) return PatternLabel::PositionalPrev;
    if (s.first_token_share >= t.null_first) return PatternLabel::NullFirst;
    if (s.decay_slope && *s.decay_slope <= t.distance_decay_max_slope &&
        at_least(s.dispersion, t.distance_decay_min_dispersion)) {
        return PatternLabel::DistanceDecay;
    }
    if (at_least(s.dispersion, t.dispersed)) return PatternLabel::Dispersed;
    return PatternLabel::Unlabeled;
}

HeadSummary summarize_head(const Matrix& alpha, const std::vector<int>& segments, Mode mode, const Thresholds& t) {
    HeadSummary s;
    const std::size_t n = alpha.rows();
    s.first_token_share = first_token_share(alpha);
    if (n >= 2) {
        s.prev_token_score = prev_token_score(alpha, mode);
        s.dispersion = dispersion(alpha, mode);
    }
    if (mode == Mode::Causal && n >= 3) s.decay_slope = decay_slope(alpha, mode);
    if (mode == Mode::Bidirectional) s.inter_sentence_fraction = inter_sentence_fraction(alpha, segments, mode);
    s.label = classify_head(s, t);
    return s;
}

HeadSummary summarize_head(const AttentionTrace& trace, std::size_t layer, std::size_t head, const Thresholds& t) {
    HeadSummary s = summarize_head(trace.at(layer, head).alpha, trace.input.segments, trace.mode(), t);
    s.layer = layer;
    s.head = head;
    return s;
}

std::vector<HeadSummary> summarize(const AttentionTrace& trace, const Thresholds& t) {
    std::vector<HeadSummary> out;
    out.reserve(trace.n_layers * trace.n_heads);
    for (std::size_t l = 0; l < trace.n_layers; ++l) {
        for (std::size_t h = 0; h < trace.n_heads; ++h) out.push_back(summarize_head(trace, l, h, t));
    }
    return out;
}

std::vector<RankedHead> rank_heads(const AttentionTrace& trace, std::string_view metric) {
    using MetricFn = double (*)(const AttentionTrace&, const Matrix&);
    static const std::map<std::string, MetricFn, std::less<>> metrics = {
        {"prev_token_score", [](const AttentionTrace& t, const Matrix& a) { return prev_token_score(a, t.mode()); }},
        {"first_token_share", [](const AttentionTrace&, const Matrix& a) { return first_token_share(a); }},
        {"dispersion", [](const AttentionTrace& t, const Matrix& a) { return dispersion(a, t.mode()); }},
        {"decay_slope", [](const AttentionTrace& t, const Matrix& a) { return decay_slope(a, t.mode()); }},
        {"inter_sentence_fraction",
         [](const AttentionTrace& t, const Matrix& a) { return inter_sentence_fraction(a, t.input.segments, t.mode()); }},
    };
    auto it = metrics.find(metric);
    if (it == metrics.end()) throw Error(ErrorKind::Input, "unknown metric '" + std::string(metric) + "'");

    std::vector<RankedHead> out;
    for (std::size_t l = 0; l < trace.n_layers; ++l) {
        for (std::size_t h = 0; h < trace.n_heads; ++h) out.push_back({l, h, it->second(trace, trace.at(l, h).alpha)});
    }
    std::ranges::stable_sort(out, [](const RankedHead& a, const RankedHead& b) {
        if (a.value != b.value) return a.value > b.value;
        return std::tie(a.layer, a.head) < std::tie(b.layer, b.head);
    });
    return out;
}

}  // namespace attnviz
