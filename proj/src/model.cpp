// SPDX-License-Identifier: Apache-2.0
#include "attnviz/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "attnviz/error.hpp"
#include "attnviz/splitmix.hpp"

namespace attnviz {

namespace {

constexpr std::uint8_t kMagic[6] = {'A', 'T', 'N', 'M', '1', '\0'};
constexpr std::size_t kHeaderFields = 7;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t to_u32(std::size_t v, const char* what) {
    if (v > 0xffffffffULL) throw Error(ErrorKind::Input, std::string(what) + " does not fit in 32 bits");
    return static_cast<std::uint32_t>(v);
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::span<const std::uint8_t> take(std::size_t n, const std::string& what) {
        if (bytes_.size() - pos_ < n) throw Error(ErrorKind::Format, "model file truncated while reading " + what);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::uint32_t u32(const std::string& what) {
        auto b = take(4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

void ModelConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::Input, "invalid model config: " + msg); };
    if (n_layers < 1) fail("layers must be >= 1");
    if (n_heads < 1) fail("heads must be >= 1");
    if (d_model < 1) fail("d_model must be >= 1");
    if (d_model % n_heads != 0) {
        fail("d_model " + std::to_string(d_model) + " is not divisible by heads " + std::to_string(n_heads));
    }
    if (d_ff < 1) fail("d_ff must be >= 1");
    if (vocab_size < 4) fail("vocab_size must be >= 4 (special tokens)");
    if (max_seq < 1) fail("max_seq must be >= 1");
}

std::vector<TensorSpec> tensor_layout(const ModelConfig& c) {
    // Shapes only; a default-constructed WeightSet with the right layer count drives the order.
    WeightSet shapes;
    shapes.layers.resize(c.n_layers);
    std::vector<TensorSpec> out;
    for_each_tensor(c, shapes, [&](const std::string& name, Matrix&) {
        std::size_t rows = 1, cols = c.d_model;
        auto ends_with = [&](std::string_view suf) {
            return name.size() >= suf.size() && name.compare(name.size() - suf.size(), suf.size(), suf) == 0;
        };
        if (name == "token_embedding") rows = c.vocab_size;
        else if (name == "position_embedding") rows = c.max_seq;
        else if (name == "segment_embedding") rows = 2;
        else if (ends_with(".Wq") || ends_with(".Wk") || ends_with(".Wv") || ends_with(".Wo")) rows = c.d_model;
        else if (ends_with(".W1")) rows = c.d_model, cols = c.d_ff;
        else if (ends_with(".b1")) cols = c.d_ff;
        else if (ends_with(".W2")) rows = c.d_ff;
        out.push_back({name, rows, cols});
    });
    return out;
}

WeightSet generate_synthetic_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    const auto layout = tensor_layout(config);
    WeightSet w;
    w.layers.resize(config.n_layers);
    std::size_t idx = 0;
    for_each_tensor(config, w, [&](const std::string& name, Matrix& m) {
        const auto& spec = layout[idx++];
        std::vector<double> values(spec.rows * spec.cols);
        SplitMix64 rng(seed ^ fnv1a64(name));
        for (double& v : values) {
            const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            v = static_cast<float>(-0.1 + 0.2 * unit);
        }
        m = Matrix(spec.rows, spec.cols, std::move(values));
    });
    return w;
}

std::vector<std::uint8_t> encode_model(const ModelConfig& c, const WeightSet& weights) {
    c.validate();
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    for (auto [v, what] : {std::pair{c.n_layers, "layers"}, {c.n_heads, "heads"}, {c.d_model, "d_model"},
                           {c.d_ff, "d_ff"}, {c.vocab_size, "vocab_size"}, {c.max_seq, "max_seq"}}) {
        put_u32(out, to_u32(v, what));
    }
    put_u32(out, c.mode == Mode::Bidirectional ? 1 : 0);

    const auto layout = tensor_layout(c);
    if (weights.layers.size() != c.n_layers) throw Error(ErrorKind::Shape, "weights have wrong layer count");
    std::size_t idx = 0;
    for_each_tensor(c, weights, [&](const std::string& name, const Matrix& m) {
        const auto& spec = layout[idx++];
        if (m.rows() != spec.rows || m.cols() != spec.cols) {
            throw Error(ErrorKind::Shape, "tensor " + name + " is " + m.shape_string());
        }
        put_u32(out, to_u32(name.size(), "name"));
        out.insert(out.end(), name.begin(), name.end());
        put_u32(out, to_u32(m.rows(), "rows"));
        put_u32(out, to_u32(m.cols(), "cols"));
        for (double v : m.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    });
    return out;
}

std::pair<ModelConfig, WeightSet> decode_model(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    auto magic = r.take(sizeof kMagic, "magic");
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
        throw Error(ErrorKind::Format, "bad magic: not an ATNM1 model file");
    }
    std::uint32_t h[kHeaderFields];
    for (auto& f : h) f = r.u32("header");
    ModelConfig c{h[0], h[1], h[2], h[3], h[4], h[5], Mode::Causal};
    if (h[6] > 1) throw Error(ErrorKind::Format, "bad mode flag " + std::to_string(h[6]));
    c.mode = h[6] == 1 ? Mode::Bidirectional : Mode::Causal;
    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::Format, e.what());
    }

    const auto layout = tensor_layout(c);
    WeightSet w;
    w.layers.resize(c.n_layers);
    std::size_t idx = 0;
    for_each_tensor(c, w, [&](const std::string& name, Matrix& m) {
        const auto& spec = layout[idx++];
        const auto name_len = r.u32(name + " name length");
        auto name_bytes = r.take(name_len, name + " name");
        std::string got(name_bytes.begin(), name_bytes.end());
        if (got != name) throw Error(ErrorKind::Format, "expected tensor " + name + ", found '" + got + "'");
        const std::uint64_t rows = r.u32(name + " rows");
        const std::uint64_t cols = r.u32(name + " cols");
        if (rows != spec.rows || cols != spec.cols) {
            throw Error(ErrorKind::Shape, "tensor " + name + " has " + std::to_string(rows * cols) + " values (" +
                                              std::to_string(rows) + "x" + std::to_string(cols) +
                                              "), config requires " + std::to_string(spec.rows) + "x" +
                                              std::to_string(spec.cols));
        }
        auto raw = r.take(rows * cols * 4, name + " data");
        std::vector<double> values(rows * cols);
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::uint32_t u = 0;
            for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(raw[4 * i + b]) << (8 * b);
            const float f = std::bit_cast<float>(u);
            if (!std::isfinite(f)) throw Error(ErrorKind::Data, "tensor " + name + " has a non-finite entry at " + std::to_string(i));
            values[i] = f;
        }
        m = Matrix(rows, cols, std::move(values));
    });
    if (r.remaining() != 0) throw Error(ErrorKind::Format, "trailing bytes after final tensor");
    return {c, std::move(w)};
}

void save_model(const std::filesystem::path& path, const ModelConfig& config, const WeightSet& weights) {
    const auto bytes = encode_model(config, weights);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::pair<ModelConfig, WeightSet> load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open model " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_model(bytes);
}

}  // namespace attnviz
