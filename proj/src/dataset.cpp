#include "blw/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "blw/binio.hpp"
#include "blw/error.hpp"
#include "blw/resample.hpp"
#include "blw/rng.hpp"

namespace blw {

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

bool is_test_record(std::string_view name) {
    return std::find(kTestRecords.begin(), kTestRecords.end(), name) != kTestRecords.end();
}

std::string_view to_string(BoundaryRule r) { return r == BoundaryRule::p_onset ? "p-onset" : "beat"; }

BoundaryRule parse_boundary_rule(std::string_view name) {
    if (name == "p-onset" || name == "p_onset") return BoundaryRule::p_onset;
    if (name == "beat") return BoundaryRule::beat;
    throw ConfigError("unknown boundary rule '" + std::string(name) + "' (p-onset|beat)");
}

std::vector<std::int64_t> beat_boundaries(const std::vector<wfdb::Annotation>& ann, BoundaryRule rule) {
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < ann.size(); ++i) {
        if (rule == BoundaryRule::beat) {
            if (wfdb::is_beat_code(ann[i].code)) out.push_back(ann[i].sample);
        } else if (ann[i].code == wfdb::kPWave && i > 0 && ann[i - 1].code == wfdb::kWaveOnset) {
            out.push_back(ann[i - 1].sample);
        }
    }
    return out;
}

std::vector<BeatSegment> extract_beats(std::span<const double> signal, std::span<const std::int64_t> boundaries,
                                       const std::string& record, std::uint32_t channel) {
    std::vector<BeatSegment> out;
    const auto n = static_cast<std::int64_t>(signal.size());
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
        const std::int64_t a = boundaries[i];
        const std::int64_t b = boundaries[i + 1];
        if (b < a) throw ConfigError("beat boundaries must be sorted ascending");
        const std::int64_t len = b - a;
        if (len == 0 || len > static_cast<std::int64_t>(kBeatLength) || a < 0 || b > n) continue;
        BeatSegment s;
        s.id = {record, channel, static_cast<std::uint32_t>(i)};
        s.original_length = static_cast<std::uint32_t>(len);
        s.samples.assign(kBeatLength, 0.0);
        std::copy(signal.begin() + a, signal.begin() + b, s.samples.begin());
        out.push_back(std::move(s));
    }
    return out;
}

void make_splits(std::vector<BeatSegment>& beats, std::span<const std::string> record_names, std::uint64_t seed,
                 bool require_test_records) {
    if (require_test_records) {
        std::string missing;
        for (auto name : kTestRecords) {
            if (std::find(record_names.begin(), record_names.end(), name) == record_names.end()) {
                missing += (missing.empty() ? "" : ", ") + std::string(name);
            }
        }
        if (!missing.empty()) throw MissingRecordError("test records missing: " + missing);
    }
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < beats.size(); ++i) {
        if (is_test_record(beats[i].id.record)) {
            beats[i].split = Split::test;
        } else {
            rest.push_back(i);
        }
    }
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(rest));
    const auto n_train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(rest.size())));
    for (std::size_t k = 0; k < rest.size(); ++k) beats[rest[k]].split = k < n_train ? Split::train : Split::val;
}

// --- Noise --------------------------------------------------------------------

NoiseStreams build_noise_streams(const std::vector<std::vector<double>>& channels) {
    if (channels.size() < 2) {
        throw ConfigError("noise record needs two channels, got " + std::to_string(channels.size()));
    }
    NoiseStreams s;
    for (std::uint32_t c = 0; c < 2; ++c) {
        const auto& ch = channels[c];
        const std::size_t reserved = ch.size() * 13 / 100;
        for (std::size_t i = 0; i < ch.size(); ++i) {
            NoiseStream& dst = i < reserved ? s.test : s.trainval;
            dst.samples.push_back(ch[i]);
            dst.origin.emplace_back(c, static_cast<std::uint32_t>(i));
        }
    }
    return s;
}

std::vector<double> next_window(NoiseStream& stream, std::size_t n) {
    if (stream.samples.empty()) throw ConfigError("noise stream is empty");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = stream.samples[stream.cursor];
        stream.cursor = (stream.cursor + 1) % stream.samples.size();
    }
    return w;
}

std::string_view to_string(NoiseScale s) { return s == NoiseScale::peak ? "peak" : "peak-to-peak"; }

NoiseScale parse_noise_scale(std::string_view name) {
    if (name == "peak") return NoiseScale::peak;
    if (name == "peak-to-peak" || name == "p2p") return NoiseScale::peak_to_peak;
    throw ConfigError("unknown noise scale '" + std::string(name) + "' (peak|peak-to-peak)");
}

namespace {

double amplitude(std::span<const double> v, NoiseScale mode) {
    if (v.empty()) return 0.0;
    if (mode == NoiseScale::peak) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

}  // namespace

BeatPair inject_noise(const BeatSegment& beat, NoiseStream& stream, Rng& rng, const InjectOptions& options) {
    const std::size_t L = beat.original_length;
    std::vector<double> window = next_window(stream, kBeatLength);
    BeatPair p;
    p.clean = beat;
    p.alpha = options.alpha ? *options.alpha : rng.uniform(kAlphaMin, kAlphaMax);
    const double beat_amp = amplitude(std::span<const double>(beat.samples).first(L), options.scale);
    const double noise_amp = amplitude(std::span<const double>(window).first(L), options.scale);
    double scale = 0.0;
    if (beat_amp > 0.0 && noise_amp > 0.0) {
        scale = p.alpha * beat_amp / noise_amp;
    } else {
        p.degenerate = true;
    }
    p.noisy.assign(kBeatLength, 0.0);
    for (std::size_t i = 0; i < L; ++i) p.noisy[i] = beat.samples[i] + scale * window[i];
    return p;
}

// --- Synthetic data -----------------------------------------------------------

namespace {

struct Bump {
    double center;  // seconds from P onset
    double width;   // seconds
    double amp;     // mV
};

struct Morphology {
    std::array<Bump, 5> bumps;  // P, Q, R, S, T
};

Morphology draw_morphology(Rng& rng, double r_amp, double duration) {
    Morphology m;
    const double tp = rng.uniform(0.05, 0.08);
    const double tr = tp + rng.uniform(0.12, 0.17);
    const double sigma_t = rng.uniform(0.035, 0.06);
    const double tt = std::min(tr + rng.uniform(0.22, 0.32), duration - 3.0 * sigma_t);
    const double t_sign = rng.uniform() < 0.15 ? -1.0 : 1.0;
    m.bumps[0] = {tp, rng.uniform(0.018, 0.028), rng.uniform(0.08, 0.25) * r_amp};
    m.bumps[1] = {tr - rng.uniform(0.025, 0.035), rng.uniform(0.006, 0.01), -rng.uniform(0.05, 0.2) * r_amp};
    m.bumps[2] = {tr, rng.uniform(0.008, 0.014), r_amp};
    m.bumps[3] = {tr + rng.uniform(0.025, 0.04), rng.uniform(0.006, 0.012), -rng.uniform(0.1, 0.3) * r_amp};
    m.bumps[4] = {tt, sigma_t, t_sign * rng.uniform(0.15, 0.4) * r_amp};
    return m;
}

std::vector<double> render(const Morphology& m, std::size_t length) {
    std::vector<double> v(length, 0.0);
    for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / kSamplingRate;
        for (const Bump& b : m.bumps) {
            const double z = (t - b.center) / b.width;
            v[i] += b.amp * std::exp(-0.5 * z * z);
        }
    }
    return v;
}

}  // namespace

BeatSegment synth_ecg_beat(Rng& rng, const SynthBeatParams& params) {
    if (params.length == 0 || params.length > kBeatLength) {
        throw ConfigError("synthetic beat length must be in [1, " + std::to_string(kBeatLength) + "]");
    }
    const Morphology m = draw_morphology(rng, params.r_amplitude, static_cast<double>(params.length) / kSamplingRate);
    BeatSegment s;
    s.original_length = static_cast<std::uint32_t>(params.length);
    s.samples = render(m, params.length);
    s.samples.resize(kBeatLength, 0.0);
    return s;
}

std::vector<double> synth_blw(Rng& rng, std::size_t length, double fs) {
    std::vector<double> v(length, 0.0);
    const auto components = static_cast<int>(rng.between(3, 6));
    for (int k = 0; k < components; ++k) {
        const double f = rng.uniform(0.05, 3.0);
        const double amp = rng.uniform(0.3, 1.0);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < length; ++i) {
            v[i] += amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs + phase);
        }
    }
    const double start = rng.uniform(-0.5, 0.5);
    const double end = rng.uniform(-0.5, 0.5);
    for (std::size_t i = 0; i < length; ++i) {
        const double t = length > 1 ? static_cast<double>(i) / static_cast<double>(length - 1) : 0.0;
        v[i] += start + (end - start) * t;
    }
    return v;
}

SynthRecord synth_record(Rng& rng, const std::string& name, std::size_t beats, std::size_t channels) {
    SynthRecord r;
    r.name = name;
    const double mean_rr = rng.uniform(300.0, 440.0);
    std::vector<std::size_t> lengths(beats);
    for (auto& len : lengths) {
        len = static_cast<std::size_t>(std::lround(mean_rr * rng.uniform(0.92, 1.08)));
        len = std::min(len, kBeatLength);
    }
    r.boundaries.push_back(0);
    for (std::size_t len : lengths) r.boundaries.push_back(r.boundaries.back() + static_cast<std::int64_t>(len));
    const std::size_t shortest = *std::min_element(lengths.begin(), lengths.end());
    for (std::size_t c = 0; c < channels; ++c) {
        const double r_amp = rng.uniform(0.6, 2.0);
        const Morphology base = draw_morphology(rng, r_amp, static_cast<double>(shortest) / kSamplingRate);
        std::vector<double> signal;
        for (std::size_t len : lengths) {
            Morphology m = base;
            for (Bump& b : m.bumps) b.amp *= rng.uniform(0.95, 1.05);
            const auto beat = render(m, len);
            signal.insert(signal.end(), beat.begin(), beat.end());
        }
        r.channels.push_back(std::move(signal));
    }
    return r;
}

std::vector<std::vector<double>> synth_noise_record(Rng& rng, std::size_t length) {
    const std::size_t segment = static_cast<std::size_t>(20.0 * kSamplingRate);
    const std::size_t fade = static_cast<std::size_t>(2.0 * kSamplingRate);
    std::vector<std::vector<double>> out(2, std::vector<double>(length, 0.0));
    for (auto& ch : out) {
        for (std::size_t start = 0; start < length; start += segment) {
            const std::size_t span = std::min(segment + fade, length - start);
            const auto piece = synth_blw(rng, span);
            for (std::size_t i = 0; i < span; ++i) {
                double w = 1.0;
                if (start > 0 && i < fade) w = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / fade);
                if (i >= segment) w = 0.5 + 0.5 * std::cos(std::numbers::pi * static_cast<double>(i - segment) / fade);
                ch[start + i] += w * piece[i];
            }
        }
    }
    return out;
}

std::vector<std::string> synthetic_record_names(std::size_t count) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < count; ++i) {
        if (i < kTestRecords.size()) {
            names.emplace_back(kTestRecords[i]);
        } else {
            const std::string k = std::to_string(i - kTestRecords.size() + 1);
            names.push_back("syn" + std::string(k.size() < 3 ? 3 - k.size() : 0, '0') + k);
        }
    }
    return names;
}

// --- Prepared dataset ---------------------------------------------------------

std::size_t Dataset::count(Split s) const {
    return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(),
                                                  [&](const BeatPair& p) { return p.clean.split == s; }));
}

std::vector<const BeatPair*> Dataset::select(Split s) const {
    std::vector<const BeatPair*> out;
    for (const auto& p : pairs)
        if (p.clean.split == s) out.push_back(&p);
    return out;
}

namespace {

constexpr std::string_view kDatasetMagic = "DFDS";
constexpr std::size_t kRecordNameWidth = 16;
constexpr std::size_t kPairBytes = kRecordNameWidth + 4 * 5 + 8 + 8 * 2 * kBeatLength;

}  // namespace

std::vector<std::uint8_t> encode_dataset(const Dataset& d) {
    ByteWriter w;
    w.bytes().reserve(36 + d.pairs.size() * kPairBytes);
    w.raw(kDatasetMagic);
    w.u32(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(kBeatLength));
    w.u64(d.seed);
    w.u32(static_cast<std::uint32_t>(d.source));
    w.u64(d.pairs.size());
    for (const BeatPair& p : d.pairs) {
        if (p.clean.samples.size() != kBeatLength || p.noisy.size() != kBeatLength) {
            throw ShapeError("beat pair for " + p.clean.id.record + " is not " + std::to_string(kBeatLength) + " samples");
        }
        w.fixed(p.clean.id.record, kRecordNameWidth);
        w.u32(p.clean.id.channel);
        w.u32(p.clean.id.beat_index);
        w.u32(p.clean.original_length);
        w.u32(static_cast<std::uint32_t>(p.clean.split));
        w.u32(p.degenerate ? 1u : 0u);
        w.f64(p.alpha);
        for (double v : p.clean.samples) w.f64(v);
        for (double v : p.noisy) w.f64(v);
    }
    return std::move(w.bytes());
}

Dataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes, "dataset");
    if (r.raw(4) != kDatasetMagic) throw FormatError("dataset: bad magic");
    const std::uint32_t version = r.u32();
    if (version != kDatasetVersion) throw FormatError("dataset: unsupported version " + std::to_string(version));
    const std::uint32_t beat_length = r.u32();
    if (beat_length != kBeatLength) throw FormatError("dataset: beat length " + std::to_string(beat_length));
    Dataset d;
    d.seed = r.u64();
    const std::uint32_t source = r.u32();
    if (source > 1) throw FormatError("dataset: unknown source " + std::to_string(source));
    d.source = static_cast<DataSource>(source);
    const std::uint64_t count = r.u64();
    if (r.remaining() != count * kPairBytes) {
        throw FormatError("dataset: header announces " + std::to_string(count) + " pairs but " +
                          std::to_string(r.remaining()) + " bytes follow");
    }
    d.pairs.resize(count);
    for (BeatPair& p : d.pairs) {
        p.clean.id.record = r.fixed(kRecordNameWidth);
        p.clean.id.channel = r.u32();
        p.clean.id.beat_index = r.u32();
        p.clean.original_length = r.u32();
        const std::uint32_t split = r.u32();
        if (split > 2 || p.clean.original_length > kBeatLength) throw FormatError("dataset: corrupt pair record");
        p.clean.split = static_cast<Split>(split);
        p.degenerate = (r.u32() & 1u) != 0;
        p.alpha = r.f64();
        p.clean.samples.resize(kBeatLength);
        p.noisy.resize(kBeatLength);
        for (double& v : p.clean.samples) v = r.f64();
        for (double& v : p.noisy) v = r.f64();
    }
    r.expect_end();
    return d;
}

void save_dataset(const std::string& path, const Dataset& d) { write_file(path, encode_dataset(d)); }

Dataset load_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

namespace {

void inject_all(Dataset& d, std::vector<BeatSegment>& beats, NoiseStreams& streams, const PrepareOptions& opt) {
    Rng rng(derive_seed(opt.seed, 4));
    InjectOptions inject;
    inject.scale = opt.scale;
    d.pairs.reserve(beats.size());
    for (const BeatSegment& b : beats) {
        NoiseStream& s = b.split == Split::test ? streams.test : streams.trainval;
        d.pairs.push_back(inject_noise(b, s, rng, inject));
    }
}

std::vector<std::string> list_records(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> names;
    const fs::path list = fs::path(dir) / "RECORDS";
    if (fs::exists(list)) {
        std::ifstream in(list);
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (!line.empty()) names.push_back(line);
        }
        return names;
    }
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
        if (e.path().extension() == ".hea") names.push_back(e.path().stem().string());
    }
    if (ec) throw IoError("cannot list '" + dir + "': " + ec.message());
    std::sort(names.begin(), names.end());
    return names;
}

std::vector<double> to_working_rate(const std::vector<double>& x, double fs) {
    if (fs == kSamplingRate) return x;
    const auto ifs = static_cast<std::size_t>(std::lround(fs));
    if (std::abs(fs - static_cast<double>(ifs)) > 1e-9) {
        throw ConfigError("cannot resample from non-integer rate " + std::to_string(fs));
    }
    return resample_rational(x, static_cast<std::size_t>(kSamplingRate), ifs);
}

}  // namespace

Dataset prepare_physionet(const std::string& qt_dir, const std::string& nstdb_dir, const PrepareOptions& opt) {
    const auto names = list_records(qt_dir);
    {
        std::vector<BeatSegment> none;
        make_splits(none, names, opt.seed, true);
    }
    std::vector<BeatSegment> beats;
    for (const auto& name : names) {
        const auto rec = wfdb::read_record(qt_dir, name);
        const auto ann = wfdb::read_annotations(qt_dir, name, opt.annotation_ext);
        auto bounds = beat_boundaries(ann, opt.rule);
        const double ratio = kSamplingRate / rec.header.fs;
        for (auto& b : bounds) b = static_cast<std::int64_t>(std::llround(static_cast<double>(b) * ratio));
        for (std::size_t c = 0; c < rec.signals.size(); ++c) {
            const auto signal = to_working_rate(rec.signals[c], rec.header.fs);
            auto part = extract_beats(signal, bounds, name, static_cast<std::uint32_t>(c));
            std::move(part.begin(), part.end(), std::back_inserter(beats));
        }
    }
    make_splits(beats, names, derive_seed(opt.seed, 2), true);

    const auto em = wfdb::read_record(nstdb_dir, "em");
    std::vector<std::vector<double>> noise;
    for (const auto& ch : em.signals) noise.push_back(to_working_rate(ch, em.header.fs));
    auto streams = build_noise_streams(noise);

    Dataset d;
    d.seed = opt.seed;
    d.source = DataSource::physionet;
    inject_all(d, beats, streams, opt);
    return d;
}

Dataset prepare_synthetic(const PrepareOptions& opt) {
    const auto names = synthetic_record_names(opt.synth_records);
    Rng rec_rng(derive_seed(opt.seed, 1));
    std::vector<BeatSegment> beats;
    for (const auto& name : names) {
        const std::size_t n_beats = is_test_record(name) && opt.synth_test_beats_per_channel > 0
                                        ? opt.synth_test_beats_per_channel
                                        : opt.synth_beats_per_channel;
        const auto rec = synth_record(rec_rng, name, n_beats, 2);
        for (std::size_t c = 0; c < rec.channels.size(); ++c) {
            auto part = extract_beats(rec.channels[c], rec.boundaries, name, static_cast<std::uint32_t>(c));
            std::move(part.begin(), part.end(), std::back_inserter(beats));
        }
    }
    make_splits(beats, names, derive_seed(opt.seed, 2), opt.synth_records >= kTestRecords.size());

    Rng noise_rng(derive_seed(opt.seed, 3));
    auto streams = build_noise_streams(synth_noise_record(noise_rng, opt.synth_noise_length));

    Dataset d;
    d.seed = opt.seed;
    d.source = DataSource::synthetic;
    inject_all(d, beats, streams, opt);
    return d;
}

}  // namespace blw
