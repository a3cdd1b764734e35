#include <filesystem>

#include "blw/error.hpp"
#include "blw/rng.hpp"
#include "blw/wfdb.hpp"
#include "doctest.h"

using namespace blw;
using namespace blw::wfdb;

namespace {

RecordHeader one_channel(int format, int baseline = 0, std::size_t samples = 0) {
    RecordHeader h;
    h.name = "t";
    h.samples = samples;
    SignalSpec s;
    s.file = "t.dat";
    s.format = format;
    s.baseline = baseline;
    h.signals.push_back(s);
    return h;
}

}  // namespace

TEST_CASE("header parsing") {
    const auto h = parse_header(
        "# comment\n"
        "sel123 2 250 225000\n"
        "sel123.dat 212 200 11 1024 -3 -31795 0 MLII\n"
        "sel123.dat 212 400(12)/uV 11 1024 5 1234 0 V5\n"
        "# info\n");
    CHECK(h.name == "sel123");
    CHECK(h.channels() == 2);
    CHECK(h.fs == 250.0);
    CHECK(h.samples == 225000);
    CHECK(h.signals[0].gain == 200.0);
    CHECK(h.signals[0].baseline == 1024);  // adc zero stands in for a missing baseline
    CHECK(h.signals[0].description == "MLII");
    CHECK(h.signals[1].gain == 400.0);
    CHECK(h.signals[1].baseline == 12);
    CHECK(h.signals[1].units == "uV");

    const auto bare = parse_header("r 1 360\nr.dat 16\n");
    CHECK(bare.signals[0].gain == kDefaultGain);
    CHECK(bare.signals[0].baseline == 0);
    CHECK(bare.samples == 0);
    CHECK(parse_header("r 1\nr.dat 16 0\n").signals[0].gain == kDefaultGain);
    CHECK(parse_header("r 1\nr.dat 16\n").fs == 250.0);

    CHECK_THROWS_AS(parse_header("r 0 250\n"), ParseError);
    CHECK_THROWS_AS(parse_header("r 2 250\nr.dat 212\n"), ParseError);
    CHECK_THROWS_AS(parse_header("r 1 250\nr.dat 80\n"), UnsupportedFormatError);
    try {
        parse_header("r 1 250\nr.dat 212 abc\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK(parse_header(format_header(h)).signals[1].baseline == 12);
}

TEST_CASE("format 212 fixtures") {
    const auto h = one_channel(212, 0, 2);
    const auto mv = read_samples(h, {0xE8, 0x3F, 0x10});
    REQUIRE(mv[0].size() == 2);
    CHECK(mv[0][0] == doctest::Approx(-0.12));
    CHECK(mv[0][1] == doctest::Approx(3.92));

    // Hand-packed groups: (1, -1), (2047, -2048), (0, 256).
    const std::vector<std::uint8_t> bytes{0x01, 0xF0, 0xFF, 0xFF, 0x87, 0x00, 0x00, 0x10, 0x00};
    const auto adu = decode_file(one_channel(212, 0, 6), "t.dat", bytes);
    CHECK(adu[0] == std::vector<int>{1, -1, 2047, -2048, 0, 256});
    CHECK(encode_file(one_channel(212, 0, 6), "t.dat", adu) == bytes);

    // Odd count: the last group carries one sample in two bytes.
    const auto odd = decode_file(one_channel(212, 0, 3), "t.dat", {0x01, 0xF0, 0xFF, 0x05, 0x00});
    CHECK(odd[0] == std::vector<int>{1, -1, 5});

    const auto zeros = read_samples(one_channel(212, 5, 4), std::vector<std::uint8_t>(6, 0));
    for (double v : zeros[0]) CHECK(v == doctest::Approx(-5.0 / 200.0));

    CHECK_THROWS_AS(decode_file(one_channel(212, 0, 4), "t.dat", {0, 0, 0, 0}), LengthError);
}

TEST_CASE("format 16 fixtures") {
    CHECK(decode_file(one_channel(16, 0, 1), "t.dat", {0x01, 0x00})[0][0] == 1);
    CHECK(decode_file(one_channel(16, 0, 1), "t.dat", {0xFF, 0xFF})[0][0] == -1);
    CHECK(decode_file(one_channel(16, 0, 1), "t.dat", {0x00, 0x80})[0][0] == -32768);
    CHECK_THROWS_AS(decode_file(one_channel(16, 0, 2), "t.dat", {0x01, 0x00, 0x02}), LengthError);
}

TEST_CASE("interleaved channels and unit round trips") {
    Rng rng(3);
    for (int format : {212, 16}) {
        RecordHeader h = one_channel(format, 0, 101);
        SignalSpec second = h.signals[0];
        second.gain = 123.0;
        second.baseline = -7;
        h.signals.push_back(second);
        const int lim = format == 212 ? 2047 : 32767;
        std::vector<std::vector<int>> adu(2, std::vector<int>(101));
        for (auto& ch : adu)
            for (int& v : ch) v = static_cast<int>(rng.between(-lim - 1, lim));
        const auto bytes = encode_file(h, "t.dat", adu);
        CHECK(decode_file(h, "t.dat", bytes) == adu);
        const auto mv = read_samples(h, bytes);
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t i = 0; i < 101; ++i) CHECK(to_adu(h.signals[c], mv[c][i]) == adu[c][i]);
    }
}

TEST_CASE("annotation parsing") {
    auto one = parse_annotations({0x05, 0x04, 0x00, 0x00});
    REQUIRE(one.size() == 1);
    CHECK(one[0].code == 1);
    CHECK(one[0].sample == 5);
    CHECK(parse_annotations({0x00, 0x00}).empty());
    const auto two = parse_annotations({0x05, 0x04, 0x07, 0x04, 0x00, 0x00});
    CHECK(two[0].sample == 5);
    CHECK(two[1].sample == 12);

    // SKIP of 70000 (high word first), then a P wave 3 samples later with aux "ab".
    const std::vector<std::uint8_t> skip{0x00, 0xEC, 0x01, 0x00, 0x70, 0x11, 0x03, 0x60, 0x02, 0xFC, 'a', 'b', 0x00, 0x00};
    const auto s = parse_annotations(skip);
    REQUIRE(s.size() == 1);
    CHECK(s[0].sample == 70003);
    CHECK(s[0].code == kPWave);
    CHECK(s[0].aux == "ab");

    CHECK_THROWS_AS(parse_annotations({0x05, 0x04}), ParseError);
    CHECK_THROWS_AS(parse_annotations({0x05}), ParseError);
    CHECK_THROWS_AS(parse_annotations({0x03, 0xFC, 'a', 'b'}), ParseError);
}

TEST_CASE("annotation round trip") {
    std::vector<Annotation> a;
    std::int64_t t = 0;
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        t += rng.between(0, 3000);
        Annotation x;
        x.sample = t;
        x.code = std::array<int, 5>{kNormal, kPWave, kTWave, kWaveOnset, kWaveOffset}[rng.below(5)];
        x.chan = static_cast<int>(rng.below(2));
        if (i % 7 == 0) x.aux = "(N";
        a.push_back(x);
    }
    const auto back = parse_annotations(encode_annotations(a));
    REQUIRE(back.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(back[i].sample == a[i].sample);
        CHECK(back[i].code == a[i].code);
        CHECK(back[i].chan == a[i].chan);
        CHECK(back[i].aux == a[i].aux);
    }
}

TEST_CASE("records on disk") {
    const auto dir = (std::filesystem::temp_directory_path() / "blw_wfdb_test").string();
    RecordHeader h = one_channel(212, 0, 4);
    h.name = "rec";
    h.signals[0].file = "rec.dat";
    h.signals.push_back(h.signals[0]);
    write_record(dir, h, {{1, 2, 3, 4}, {-1, -2, -3, -4}});
    write_annotations(dir, "rec", "pu1", {{2, kNormal, 0, 0, 0, ""}});
    const auto r = read_record(dir, "rec");
    CHECK(r.signals[1][3] == doctest::Approx(-4.0 / 200.0));
    CHECK(read_annotations(dir, "rec", "pu1")[0].sample == 2);
    CHECK_THROWS_AS(read_record(dir, "nope"), IoError);
    std::filesystem::remove_all(dir);
}
