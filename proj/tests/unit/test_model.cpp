// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <bit>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "attnviz/error.hpp"
#include "attnviz/model.hpp"
#include "attnviz/splitmix.hpp"
#include "support.hpp"

using namespace attnviz;

namespace {

ErrorKind decode_error(const std::vector<std::uint8_t>& bytes, std::string* message = nullptr) {
    try {
        decode_model(bytes);
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.kind();
    }
    FAIL("decode unexpectedly succeeded");
    return ErrorKind::Io;
}

std::size_t find_name(const std::vector<std::uint8_t>& bytes, const std::string& name) {
    auto it = std::search(bytes.begin(), bytes.end(), name.begin(), name.end());
    REQUIRE(it != bytes.end());
    return static_cast<std::size_t>(it - bytes.begin());
}

void put_u32(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

TEST_CASE("splitmix64 reference stream") {
    // First outputs for seed 0 from the public-domain reference implementation.
    SplitMix64 rng(0);
    CHECK(rng() == 0xe220a8397b1dcdafULL);
    CHECK(rng() == 0x6e789e6aa1b965f4ULL);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("config validation") {
    ModelConfig c = testsupport::fixture_config();
    CHECK_NOTHROW(c.validate());
    CHECK(c.d_head() == 4);
    c.d_model = 7;
    try {
        c.validate();
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Input);
        CHECK(std::string(e.what()).find("divisible") != std::string::npos);
    }
}

TEST_CASE("synthetic weights are deterministic and seed-separated") {
    const auto cfg = testsupport::fixture_config();
    const auto a = generate_synthetic_model(cfg, 42);
    CHECK(a == generate_synthetic_model(cfg, 42));
    CHECK(encode_model(cfg, a) == encode_model(cfg, generate_synthetic_model(cfg, 42)));
    CHECK(generate_synthetic_model(cfg, 1).token_embedding(0, 0) != generate_synthetic_model(cfg, 2).token_embedding(0, 0));

    const auto& want = testsupport::golden()["token_embedding_first4_seed42"];
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.token_embedding.values()[i] == want[i].get<double>());

    for_each_tensor(cfg, a, [](const std::string&, const Matrix& m) {
        for (double v : m.values()) {
            CHECK(v >= -0.1f);
            CHECK(v <= 0.1f);
        }
    });
}

TEST_CASE("model file bytes match the reference writer") {
    const auto cfg = testsupport::fixture_config();
    const auto bytes = encode_model(cfg, generate_synthetic_model(cfg, 42));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) h = (h ^ b) * 0x100000001b3ULL;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    CHECK(std::string(hex) == testsupport::golden()["model_fnv1a64_causal_seed42"].get<std::string>());
}

TEST_CASE("save/load round trip") {
    for (Mode mode : {Mode::Causal, Mode::Bidirectional}) {
        const auto cfg = testsupport::fixture_config(mode);
        const auto w = generate_synthetic_model(cfg, 9);
        const auto path = std::filesystem::temp_directory_path() / "attnviz_roundtrip.atnm";
        save_model(path, cfg, w);
        auto [c2, w2] = load_model(path);
        CHECK(c2 == cfg);
        CHECK(w2 == w);
        std::filesystem::remove(path);
    }
    CHECK_THROWS_AS(load_model("/nonexistent/model.atnm"), Error);
}

TEST_CASE("decode rejects malformed files") {
    const auto cfg = testsupport::fixture_config();
    const auto good = encode_model(cfg, generate_synthetic_model(cfg, 42));

    SUBCASE("bad magic") {
        auto b = good;
        b[0] = 'X';
        CHECK(decode_error(b) == ErrorKind::Format);
    }
    SUBCASE("truncated") {
        for (std::size_t cut : {std::size_t{3}, std::size_t{20}, good.size() / 2, good.size() - 1}) {
            CHECK(decode_error({good.begin(), good.begin() + static_cast<long>(cut)}) == ErrorKind::Format);
        }
    }
    SUBCASE("trailing bytes") {
        auto b = good;
        b.push_back(0);
        CHECK(decode_error(b) == ErrorKind::Format);
    }
    SUBCASE("Wq with 60 values under d_model 8") {
        auto b = good;
        const std::string name = "layers.0.Wq";
        const std::size_t at = find_name(b, name) + name.size();
        put_u32(b, at, 6);
        put_u32(b, at + 4, 10);
        b.erase(b.begin() + static_cast<long>(at + 8), b.begin() + static_cast<long>(at + 8 + 16));
        std::string msg;
        CHECK(decode_error(b, &msg) == ErrorKind::Shape);
        CHECK(msg.find("Wq") != std::string::npos);
        CHECK(msg.find("60") != std::string::npos);
    }
    SUBCASE("non-finite entry") {
        auto b = good;
        const std::string name = "position_embedding";
        const std::size_t at = find_name(b, name) + name.size() + 8;
        put_u32(b, at, std::bit_cast<std::uint32_t>(std::numeric_limits<float>::infinity()));
        CHECK(decode_error(b) == ErrorKind::Data);
    }
    SUBCASE("invalid header config") {
        auto b = good;
        put_u32(b, 6 + 4, 3);  // heads = 3 does not divide d_model 8
        CHECK(decode_error(b) == ErrorKind::Format);
    }
}
