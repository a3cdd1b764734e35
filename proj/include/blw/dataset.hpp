#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blw/common.hpp"
#include "blw/wfdb.hpp"

namespace blw {

class Rng;

enum class Split : std::uint32_t { train = 0, val = 1, test = 2 };
std::string_view to_string(Split s);

/// Records whose beats form the test set.
inline constexpr std::array<std::string_view, 14> kTestRecords{
    "sel123", "sel233", "sel302", "sel307", "sel820", "sel853", "sel16420",
    "sel16795", "sele0106", "sele0121", "sel32", "sel49", "sel14046", "sel15814"};
bool is_test_record(std::string_view name);

struct BeatSegment {
    BeatId id;
    /// kBeatLength samples; zero beyond original_length.
    std::vector<double> samples;
    std::uint32_t original_length = 0;
    Split split = Split::train;
};

// --- Segmentation -------------------------------------------------------------

/// `p_onset`: the wave-onset mark immediately preceding each P-wave mark.
/// `beat`: every beat-label annotation.
enum class BoundaryRule { p_onset, beat };
std::string_view to_string(BoundaryRule r);
BoundaryRule parse_boundary_rule(std::string_view name);

std::vector<std::int64_t> beat_boundaries(const std::vector<wfdb::Annotation>& annotations, BoundaryRule rule);

/// Consecutive boundaries delimit beats; segments longer than kBeatLength
/// (or empty) are dropped; beat_index is the position of the boundary pair.
std::vector<BeatSegment> extract_beats(std::span<const double> signal, std::span<const std::int64_t> boundaries,
                                       const std::string& record, std::uint32_t channel);

// --- Splits -------------------------------------------------------------------

/// Marks beats of kTestRecords as test and splits the remaining beats 70/30
/// into train/val after a seeded shuffle. With `require_test_records`, a
/// MissingRecordError lists every test record absent from `record_names`.
void make_splits(std::vector<BeatSegment>& beats, std::span<const std::string> record_names, std::uint64_t seed,
                 bool require_test_records);

// --- Noise --------------------------------------------------------------------

inline constexpr double kTestNoiseFraction = 0.13;

struct NoiseStream {
    std::vector<double> samples;
    std::size_t cursor = 0;
    /// (channel, sample) origin of every stream sample.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> origin;
};

struct NoiseStreams {
    NoiseStream test;
    NoiseStream trainval;
};

/// First 13 % of each of the first two channels (channel 1 then 2) form the
/// test stream, the remainders the train/val stream. ConfigError with fewer
/// than two channels.
NoiseStreams build_noise_streams(const std::vector<std::vector<double>>& channels);

/// Next `n` samples from the cursor, wrapping around.
std::vector<double> next_window(NoiseStream& stream, std::size_t n);

enum class NoiseScale { peak, peak_to_peak };
std::string_view to_string(NoiseScale s);
NoiseScale parse_noise_scale(std::string_view name);

inline constexpr double kAlphaMin = 0.2;
inline constexpr double kAlphaMax = 2.0;

struct BeatPair {
    BeatSegment clean;
    std::vector<double> noisy;
    double alpha = 0.0;
    /// Zero beat or zero noise window: no noise could be scaled in.
    bool degenerate = false;
};

struct InjectOptions {
    NoiseScale scale = NoiseScale::peak;
    /// Test hook: use this alpha instead of drawing one.
    std::optional<double> alpha;
};

/// Takes the next kBeatLength-sample window, scales it so its peak over the
/// beat's original length equals alpha times the beat's peak, and adds it
/// over the original length only.
BeatPair inject_noise(const BeatSegment& beat, NoiseStream& stream, Rng& rng, const InjectOptions& options = {});

// --- Synthetic data -----------------------------------------------------------

struct SynthBeatParams {
    std::size_t length = 360;
    double r_amplitude = 1.0;
};

/// Five Gaussian bumps (P, Q, R, S, T) at 360 Hz over `length` samples,
/// starting at the P-wave onset; padded to kBeatLength.
BeatSegment synth_ecg_beat(Rng& rng, const SynthBeatParams& params);
/// 3 to 6 sinusoids in [0.05, 3] Hz with random phases plus a slow ramp.
std::vector<double> synth_blw(Rng& rng, std::size_t length, double fs = kSamplingRate);

struct SynthRecord {
    std::string name;
    std::vector<std::vector<double>> channels;
    std::vector<std::int64_t> boundaries;
};

SynthRecord synth_record(Rng& rng, const std::string& name, std::size_t beats, std::size_t channels = 2);
/// Two-channel baseline-wander record: cross-faded synth_blw segments.
std::vector<std::vector<double>> synth_noise_record(Rng& rng, std::size_t length);

// --- Prepared dataset ---------------------------------------------------------

enum class DataSource : std::uint32_t { physionet = 0, synthetic = 1 };

inline constexpr std::uint32_t kDatasetVersion = 1;

struct Dataset {
    std::uint64_t seed = kDefaultSeed;
    DataSource source = DataSource::synthetic;
    std::vector<BeatPair> pairs;

    std::size_t count(Split s) const;
    std::vector<const BeatPair*> select(Split s) const;
};

std::vector<std::uint8_t> encode_dataset(const Dataset& d);
/// FormatError on bad magic/version/length, truncation or trailing bytes.
Dataset decode_dataset(const std::vector<std::uint8_t>& bytes);
void save_dataset(const std::string& path, const Dataset& d);
Dataset load_dataset(const std::string& path);

struct PrepareOptions {
    std::uint64_t seed = kDefaultSeed;
    BoundaryRule rule = BoundaryRule::p_onset;
    std::string annotation_ext = "pu1";
    NoiseScale scale = NoiseScale::peak;
    /// Synthetic corpus shape.
    std::size_t synth_records = 105;
    std::size_t synth_beats_per_channel = 10;
    /// Beats per channel for the test records; 0 uses synth_beats_per_channel.
    std::size_t synth_test_beats_per_channel = 0;
    std::size_t synth_noise_length = 360 * 60 * 30;
};

/// Resample, extract, split, build noise streams, inject.
Dataset prepare_physionet(const std::string& qt_dir, const std::string& nstdb_dir, const PrepareOptions& options);
Dataset prepare_synthetic(const PrepareOptions& options);

/// Names of the synthetic records: the 14 test names followed by generated ones.
std::vector<std::string> synthetic_record_names(std::size_t count);

}  // namespace blw
