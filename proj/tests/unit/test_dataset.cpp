#include <cmath>
#include <numbers>
#include <set>

#include "blw/dataset.hpp"
#include "blw/error.hpp"
#include "blw/resample.hpp"
#include "blw/rng.hpp"
#include "doctest.h"

using namespace blw;

namespace {

std::vector<std::int64_t> b(std::initializer_list<std::int64_t> v) { return v; }

BeatSegment beat_of(std::string record, std::uint32_t index) {
    BeatSegment s;
    s.id = {std::move(record), 0, index};
    s.samples.assign(kBeatLength, 0.0);
    s.original_length = 100;
    return s;
}

}  // namespace

TEST_CASE("extract_beats") {
    std::vector<double> signal(1000);
    for (std::size_t i = 0; i < signal.size(); ++i) signal[i] = 1.0 + static_cast<double>(i);

    auto one = extract_beats(signal, b({0, 400}), "r", 0);
    REQUIRE(one.size() == 1);
    CHECK(one[0].original_length == 400);
    CHECK(one[0].samples.size() == kBeatLength);
    CHECK(one[0].samples[399] == 400.0);
    for (std::size_t i = 400; i < kBeatLength; ++i) CHECK(one[0].samples[i] == 0.0);

    CHECK(extract_beats(signal, b({0, 600}), "r", 0).empty());
    const auto two = extract_beats(signal, b({0, 300, 700}), "r", 1);
    REQUIRE(two.size() == 2);
    CHECK(two[0].original_length == 300);
    CHECK(two[1].original_length == 400);
    CHECK(two[1].id.beat_index == 1);
    CHECK(two[1].id.channel == 1);
    CHECK(two[1].samples[0] == 301.0);
    CHECK(extract_beats(signal, b({5}), "r", 0).empty());
}

TEST_CASE("boundary rules") {
    auto a = [](std::int64_t sample, int code) {
        wfdb::Annotation x;
        x.sample = sample;
        x.code = code;
        return x;
    };
    const std::vector<wfdb::Annotation> ann{
        a(10, wfdb::kWaveOnset), a(20, wfdb::kPWave),  a(30, wfdb::kWaveOffset), a(50, wfdb::kWaveOnset),
        a(60, wfdb::kNormal),    a(80, wfdb::kWaveOffset), a(300, wfdb::kWaveOnset), a(310, wfdb::kPWave),
        a(360, wfdb::kNormal),   a(500, wfdb::kTWave)};
    CHECK(beat_boundaries(ann, BoundaryRule::p_onset) == b({10, 300}));
    CHECK(beat_boundaries(ann, BoundaryRule::beat) == b({60, 360}));
    CHECK(parse_boundary_rule("p-onset") == BoundaryRule::p_onset);
    CHECK_THROWS_AS(parse_boundary_rule("qrs"), ConfigError);
}

TEST_CASE("splits") {
    const auto names = synthetic_record_names(30);
    CHECK(names[0] == "sel123");
    CHECK(names[14] == "syn001");
    std::vector<BeatSegment> beats;
    for (const auto& n : names)
        for (std::uint32_t i = 0; i < 7; ++i) beats.push_back(beat_of(n, i));
    auto a = beats;
    make_splits(a, names, 42, true);
    std::size_t train = 0, val = 0;
    for (const auto& s : a) {
        CHECK((s.split == Split::test) == is_test_record(s.id.record));
        train += s.split == Split::train;
        val += s.split == Split::val;
    }
    const double rest = static_cast<double>(train + val);
    CHECK(std::abs(static_cast<double>(train) - 0.7 * rest) <= 1.0);
    CHECK(std::abs(static_cast<double>(val) - 0.3 * rest) <= 1.0);
    for (const auto& s : a)
        if (s.id.record == "sel123" || s.id.record == "sele0106") CHECK(s.split == Split::test);

    auto again = beats;
    make_splits(again, names, 42, true);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].split == again[i].split);

    std::vector<std::string> partial(names.begin() + 2, names.end());
    try {
        make_splits(beats, partial, 42, true);
        FAIL("expected MissingRecordError");
    } catch (const MissingRecordError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sel123") != std::string::npos);
        CHECK(msg.find("sel233") != std::string::npos);
        CHECK(msg.find("sel302") == std::string::npos);
    }
}

TEST_CASE("noise streams") {
    std::vector<std::vector<double>> ch(2, std::vector<double>(1000));
    for (std::size_t i = 0; i < 1000; ++i) {
        ch[0][i] = static_cast<double>(i);
        ch[1][i] = -static_cast<double>(i);
    }
    const auto s = build_noise_streams(ch);
    CHECK(s.test.samples.size() == 260);
    CHECK(s.trainval.samples.size() == 1740);
    CHECK(s.test.samples[130] == 0.0);
    CHECK(s.test.samples[131] == -1.0);
    std::set<std::pair<std::uint32_t, std::uint32_t>> test_origin(s.test.origin.begin(), s.test.origin.end());
    for (const auto& o : s.trainval.origin) CHECK(test_origin.count(o) == 0);
    CHECK(test_origin.size() + s.trainval.origin.size() == 2000);
    CHECK_THROWS_AS(build_noise_streams({ch[0]}), ConfigError);

    NoiseStream small;
    small.samples = {1, 2, 3};
    CHECK(next_window(small, 5) == std::vector<double>{1, 2, 3, 1, 2});
    CHECK(small.cursor == 2);
}

TEST_CASE("noise injection") {
    BeatSegment beat = beat_of("r", 0);
    beat.original_length = 4;
    beat.samples[0] = 0.2;
    beat.samples[1] = 1.0;
    beat.samples[2] = -0.5;
    NoiseStream stream;
    stream.samples.assign(kBeatLength, 0.0);
    stream.samples[0] = 2.0;
    stream.samples[1] = -1.0;
    stream.samples[6] = 50.0;  // beyond the beat: must not affect scaling
    Rng rng(1);

    SUBCASE("alpha zero leaves the beat unchanged") {
        const auto p = inject_noise(beat, stream, rng, {NoiseScale::peak, 0.0});
        CHECK(p.noisy == beat.samples);
    }
    SUBCASE("scale = alpha * beat peak / window peak") {
        const auto p = inject_noise(beat, stream, rng, {NoiseScale::peak, 0.5});
        CHECK(p.noisy[0] == doctest::Approx(0.2 + 0.25 * 2.0));
        CHECK(p.noisy[1] == doctest::Approx(1.0 - 0.25));
        CHECK(p.noisy[2] == -0.5);
        for (std::size_t i = 4; i < kBeatLength; ++i) CHECK(p.noisy[i] == 0.0);
        CHECK(stream.cursor == 0);  // consumed a full window and wrapped
    }
    SUBCASE("peak-to-peak scaling") {
        // beat p2p 1.5, window p2p over 4 samples 3.0
        const auto p = inject_noise(beat, stream, rng, {NoiseScale::peak_to_peak, 1.0});
        CHECK(p.noisy[0] == doctest::Approx(0.2 + 0.5 * 2.0));
    }
    SUBCASE("drawn alpha range and determinism") {
        Rng r1(9), r2(9);
        for (int i = 0; i < 50; ++i) {
            NoiseStream s1 = stream, s2 = stream;
            const auto a = inject_noise(beat, s1, r1);
            const auto c = inject_noise(beat, s2, r2);
            CHECK(a.alpha >= kAlphaMin);
            CHECK(a.alpha <= kAlphaMax);
            CHECK(a.noisy == c.noisy);
        }
    }
    SUBCASE("zero beat is degenerate") {
        BeatSegment z = beat_of("r", 1);
        z.original_length = 10;
        const auto p = inject_noise(z, stream, rng);
        CHECK(p.degenerate);
        for (double v : p.noisy) CHECK(v == 0.0);
    }
}

TEST_CASE("synthetic generators") {
    SUBCASE("BLW energy sits below 5 Hz") {
        Rng rng(4);
        for (int trial = 0; trial < 3; ++trial) {
            const std::size_t n = 3600;
            const auto v = synth_blw(rng, n);
            double total = 0, high = 0;
            for (std::size_t k = 0; k <= n / 2; ++k) {
                double re = 0, im = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double ph = 2 * std::numbers::pi * static_cast<double>(k * i % n) / static_cast<double>(n);
                    re += v[i] * std::cos(ph);
                    im -= v[i] * std::sin(ph);
                }
                const double e = re * re + im * im;
                total += e;
                if (static_cast<double>(k) * 360.0 / static_cast<double>(n) > 5.0) high += e;
            }
            CHECK(high < 0.01 * total);
        }
    }
    SUBCASE("beat peak matches the R amplitude") {
        Rng rng(6);
        for (double r : {0.5, 1.0, 1.7}) {
            const auto s = synth_ecg_beat(rng, {360, r});
            double peak = 0;
            for (double v : s.samples) peak = std::max(peak, v);
            CHECK(peak == doctest::Approx(r).epsilon(0.05));
            for (std::size_t i = 360; i < kBeatLength; ++i) CHECK(s.samples[i] == 0.0);
        }
    }
    SUBCASE("records are seeded") {
        Rng a(2), c(2);
        const auto r1 = synth_record(a, "x", 5);
        const auto r2 = synth_record(c, "x", 5);
        CHECK(r1.channels == r2.channels);
        CHECK(r1.boundaries.size() == 6);
        CHECK(static_cast<std::size_t>(r1.boundaries.back()) == r1.channels[0].size());
    }
}

TEST_CASE("prepared dataset") {
    PrepareOptions opt;
    opt.synth_records = 20;
    opt.synth_beats_per_channel = 3;
    opt.synth_noise_length = 360 * 60;
    const Dataset d = prepare_synthetic(opt);
    CHECK(d.pairs.size() == 20 * 2 * 3);
    CHECK(d.count(Split::test) == 14 * 2 * 3);
    for (const auto& p : d.pairs) {
        for (std::size_t i = p.clean.original_length; i < kBeatLength; ++i) {
            CHECK(p.clean.samples[i] == 0.0);
            CHECK(p.noisy[i] == 0.0);
        }
    }
    const auto bytes = encode_dataset(d);
    CHECK(encode_dataset(prepare_synthetic(opt)) == bytes);
    const Dataset back = decode_dataset(bytes);
    CHECK(back.pairs.size() == d.pairs.size());
    CHECK(back.pairs[7].noisy == d.pairs[7].noisy);
    CHECK(back.pairs[7].clean.id == d.pairs[7].clean.id);
    CHECK(encode_dataset(back) == bytes);

    auto cut = bytes;
    cut.pop_back();
    CHECK_THROWS_AS(decode_dataset(cut), FormatError);
    auto bad = bytes;
    bad[1] = 'X';
    CHECK_THROWS_AS(decode_dataset(bad), FormatError);

    opt.seed = 43;
    CHECK(encode_dataset(prepare_synthetic(opt)) != bytes);
}

TEST_CASE("resampling 250 Hz to 360 Hz") {
    const std::vector<double> c(250, 0.7);
    const auto y = resample_250_to_360(c);
    CHECK(y.size() == 360);
    for (double v : y) CHECK(std::abs(v - 0.7) < 1e-9);
    CHECK(resample_250_to_360(std::vector<double>(1001, 0.0)).size() == 1441);
    CHECK(resample_250_to_360(std::vector<double>{}).empty());

    for (double f : {5.0, 40.0, 100.0}) {
        CAPTURE(f);
        std::vector<double> x(2500);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / 250.0);
        const auto r = resample_250_to_360(x);
        REQUIRE(r.size() == 3600);
        double err = 0, ref = 0;
        // Interior only for the high tones; edges use reflection.
        const std::size_t lo = f > 5.0 ? 360 : 0, hi = f > 5.0 ? 3240 : 3600;
        for (std::size_t m = lo; m < hi; ++m) {
            const double truth = std::sin(2 * std::numbers::pi * f * static_cast<double>(m) / 360.0);
            err += (r[m] - truth) * (r[m] - truth);
            ref += truth * truth;
        }
        CHECK(std::sqrt(err / ref) < 0.01);
    }
}
