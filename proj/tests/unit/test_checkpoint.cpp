#include <filesystem>

#include "blw/binio.hpp"
#include "blw/checkpoint.hpp"
#include "blw/error.hpp"
#include "blw/rng.hpp"
#include "doctest.h"

using namespace blw;

namespace {

ModelGraph trained_like(ModelKind kind) {
    ModelGraph m = build_model(kind);
    Rng rng(99);
    initialize_weights(m, rng);
    for (auto& p : m.params())
        for (double& v : p.values) v += rng.uniform(-1e-3, 1e-3);
    return m;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
    for (ModelKind kind : {ModelKind::deepfilter, ModelKind::vanilla_nl, ModelKind::multibranch}) {
        const ModelGraph m = trained_like(kind);
        const CheckpointMeta meta{17, 3.25, 42};
        const auto bytes = encode_checkpoint(m, meta);
        const Checkpoint back = decode_checkpoint(bytes);
        CHECK(back.model.kind() == kind);
        CHECK(back.meta.epoch == 17);
        CHECK(back.meta.best_val_ssd == 3.25);
        CHECK(back.meta.seed == 42);
        REQUIRE(back.model.params().size() == m.params().size());
        for (std::size_t i = 0; i < m.params().size(); ++i) CHECK(back.model.params()[i].values == m.params()[i].values);
        CHECK(encode_checkpoint(back.model, back.meta) == bytes);
    }
}

TEST_CASE("custom graphs survive a round trip") {
    ModelGraph g(ModelKind::custom, 32, 2);
    g.add_mklanl({8, 3});
    g.add_conv(4, 5, 1, Activation::relu);
    g.add_head();
    const auto bytes = encode_checkpoint(g, {});
    const auto back = decode_checkpoint(bytes);
    CHECK(back.model.input_channels() == 2);
    CHECK(back.model.layer_widths() == g.layer_widths());
    CHECK(encode_checkpoint(back.model, {}) == bytes);
}

TEST_CASE("checkpoint rejects damaged input") {
    const auto bytes = encode_checkpoint(trained_like(ModelKind::vanilla_l), {});
    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
        std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        CHECK_THROWS_AS(decode_checkpoint(t), FormatError);
    }
    auto extra = bytes;
    extra.push_back(0);
    CHECK_THROWS_AS(decode_checkpoint(extra), FormatError);
    auto magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(magic), FormatError);
    auto version = bytes;
    version[4] = 9;
    CHECK_THROWS_AS(decode_checkpoint(version), FormatError);
}

TEST_CASE("kind mismatch needs force") {
    const auto bytes = encode_checkpoint(trained_like(ModelKind::vanilla_l), {});
    CHECK_THROWS_AS(decode_checkpoint(bytes, ModelKind::deepfilter), CompatibilityError);
    CHECK(decode_checkpoint(bytes, ModelKind::deepfilter, true).model.kind() == ModelKind::vanilla_l);
    CHECK_NOTHROW(decode_checkpoint(bytes, ModelKind::vanilla_l));
}

TEST_CASE("files on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "blw_ckpt_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "m.dfck").string();
    const ModelGraph m = trained_like(ModelKind::deepfilter);
    save_checkpoint(path, m, {3, 1.0, 7});
    const auto a = read_file(path);
    const auto loaded = load_checkpoint(path, ModelKind::deepfilter);
    save_checkpoint(path, loaded.model, loaded.meta);
    CHECK(read_file(path) == a);
    CHECK_THROWS_AS(load_checkpoint((dir / "missing.dfck").string()), IoError);
    std::filesystem::remove_all(dir);
}
