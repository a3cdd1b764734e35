#include "blw/checkpoint.hpp"

#include "blw/binio.hpp"
#include "blw/error.hpp"

namespace blw {
namespace {

constexpr std::string_view kMagic = "DFCK";

bool same_branch(const BranchSpec& a, const BranchSpec& b) {
    return a.in_channels == b.in_channels && a.out_channels == b.out_channels && a.kernel == b.kernel &&
           a.dilation == b.dilation && a.activation == b.activation;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelGraph& model, const CheckpointMeta& meta) {
    ByteWriter w;
    w.raw(kMagic);
    w.u32(kCheckpointVersion);
    w.str(to_string(model.kind()));

    w.u32(static_cast<std::uint32_t>(model.input_length()));
    w.u32(static_cast<std::uint32_t>(model.input_channels()));
    w.u32(static_cast<std::uint32_t>(model.stages().size()));
    for (const Stage& s : model.stages()) {
        w.u8(static_cast<std::uint8_t>(s.kind));
        w.u32(static_cast<std::uint32_t>(s.branches.size()));
        for (const BranchSpec& b : s.branches) {
            w.u32(static_cast<std::uint32_t>(b.in_channels));
            w.u32(static_cast<std::uint32_t>(b.out_channels));
            w.u32(static_cast<std::uint32_t>(b.kernel));
            w.u32(static_cast<std::uint32_t>(b.dilation));
            w.u8(static_cast<std::uint8_t>(b.activation));
        }
    }

    w.u64(model.params().size());
    for (const Parameter& p : model.params()) {
        w.str(p.name);
        w.u32(static_cast<std::uint32_t>(p.shape.size()));
        for (std::size_t d : p.shape) w.u64(d);
        for (double v : p.values) w.f64(v);
    }

    w.u32(meta.epoch);
    w.f64(meta.best_val_ssd);
    w.u64(meta.seed);
    return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, std::optional<ModelKind> expected,
                             bool force) {
    ByteReader r(bytes, "checkpoint");
    if (r.raw(4) != kMagic) throw FormatError("checkpoint: bad magic");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    const std::string kind_name = r.str(64);
    ModelKind kind;
    try {
        kind = parse_model_kind(kind_name);
    } catch (const ConfigError&) {
        throw FormatError("checkpoint: unknown model kind '" + kind_name + "'");
    }
    if (expected && *expected != kind && !force) {
        throw CompatibilityError("checkpoint holds a " + kind_name + " model, expected " +
                                 std::string(to_string(*expected)));
    }

    const std::uint32_t length = r.u32();
    const std::uint32_t in_channels = r.u32();
    const std::uint32_t stage_count = r.u32();
    if (length == 0 || in_channels == 0 || stage_count > 4096) throw FormatError("checkpoint: bad architecture header");
    ModelGraph model(kind, length, in_channels);
    for (std::uint32_t i = 0; i < stage_count; ++i) {
        const auto stage_kind = r.u8();
        const std::uint32_t branch_count = r.u32();
        if (branch_count == 0 || branch_count > 64) throw FormatError("checkpoint: bad branch count");
        std::vector<BranchSpec> stored(branch_count);
        for (auto& b : stored) {
            b.in_channels = r.u32();
            b.out_channels = r.u32();
            b.kernel = r.u32();
            b.dilation = r.u32();
            const auto act = r.u8();
            if (act > 1) throw FormatError("checkpoint: bad activation code");
            b.activation = static_cast<Activation>(act);
        }
        std::size_t total = 0;
        for (const auto& b : stored) total += b.out_channels;
        try {
            switch (static_cast<StageKind>(stage_kind)) {
                case StageKind::mklanl: model.add_mklanl({total, stored[0].dilation}); break;
                case StageKind::conv:
                    model.add_conv(stored[0].out_channels, stored[0].kernel, stored[0].dilation,
                                   stored[0].activation);
                    break;
                case StageKind::head: model.add_head(); break;
                default: throw FormatError("checkpoint: bad stage kind " + std::to_string(stage_kind));
            }
        } catch (const ConfigError& e) {
            throw FormatError(std::string("checkpoint: inconsistent architecture: ") + e.what());
        }
        const auto& built = model.stages().back().branches;
        bool ok = built.size() == stored.size();
        for (std::size_t j = 0; ok && j < built.size(); ++j) ok = same_branch(built[j], stored[j]);
        if (!ok) throw FormatError("checkpoint: stage " + std::to_string(i) + " does not match its kind");
    }

    const std::uint64_t count = r.u64();
    if (count != model.params().size()) {
        throw FormatError("checkpoint: " + std::to_string(count) + " parameters, architecture needs " +
                          std::to_string(model.params().size()));
    }
    for (Parameter& p : model.params()) {
        const std::string name = r.str();
        if (name != p.name) throw FormatError("checkpoint: parameter '" + name + "' where '" + p.name + "' expected");
        const std::uint32_t rank = r.u32();
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = r.u64();
        if (shape != p.shape) throw FormatError("checkpoint: shape mismatch for '" + name + "'");
        for (double& v : p.values) v = r.f64();
    }

    CheckpointMeta meta;
    meta.epoch = r.u32();
    meta.best_val_ssd = r.f64();
    meta.seed = r.u64();
    r.expect_end();
    return {std::move(model), meta};
}

void save_checkpoint(const std::string& path, const ModelGraph& model, const CheckpointMeta& meta) {
    write_file(path, encode_checkpoint(model, meta));
}

Checkpoint load_checkpoint(const std::string& path, std::optional<ModelKind> expected, bool force) {
    return decode_checkpoint(read_file(path), expected, force);
}

}  // namespace blw
