#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace blw::wfdb {

inline constexpr double kDefaultGain = 200.0;
inline constexpr double kDefaultFs = 250.0;

struct SignalSpec {
    std::string file;
    int format = 212;
    std::size_t byte_offset = 0;
    double gain = kDefaultGain;
    int baseline = 0;
    std::string units = "mV";
    int adc_resolution = 0;
    int adc_zero = 0;
    int initial_value = 0;
    std::string description;
};

struct RecordHeader {
    std::string name;
    double fs = kDefaultFs;
    /// 0 when the header leaves it out; read_samples then infers it.
    std::size_t samples = 0;
    std::vector<SignalSpec> signals;
    std::size_t channels() const { return signals.size(); }
};

/// ParseError (with line number) on malformed lines or a zero channel
/// count; UnsupportedFormatError for storage formats other than 212 and 16.
RecordHeader parse_header(std::string_view text);
std::string format_header(const RecordHeader& header);

/// Raw ADC values per channel for every signal stored in `file` (signals
/// sharing a file are interleaved frame by frame). LengthError if truncated.
std::vector<std::vector<int>> decode_file(const RecordHeader& header, const std::string& file,
                                          const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_file(const RecordHeader& header, const std::string& file,
                                      const std::vector<std::vector<int>>& adu);

/// Physical units: (adu - baseline) / gain.
double to_physical(const SignalSpec& s, int adu);
int to_adu(const SignalSpec& s, double value);

/// Single-file convenience: all channels decoded and converted to mV.
std::vector<std::vector<double>> read_samples(const RecordHeader& header, const std::vector<std::uint8_t>& bytes);

// --- Annotations ------------------------------------------------------------

inline constexpr int kNormal = 1;
inline constexpr int kPWave = 24;
inline constexpr int kTWave = 27;
inline constexpr int kWaveOnset = 39;
inline constexpr int kWaveOffset = 40;
inline constexpr int kSkip = 59;
inline constexpr int kNum = 60;
inline constexpr int kSub = 61;
inline constexpr int kChan = 62;
inline constexpr int kAux = 63;

struct Annotation {
    std::int64_t sample = 0;
    int code = 0;
    int subtype = 0;
    int chan = 0;
    int num = 0;
    std::string aux;
};

/// True for the codes WFDB counts as beats (isqrs).
bool is_beat_code(int code);

/// MIT format. ParseError on an odd byte count, a missing terminator or a
/// field running past the end.
std::vector<Annotation> parse_annotations(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_annotations(const std::vector<Annotation>& annotations);

// --- Files --------------------------------------------------------------------

struct Record {
    RecordHeader header;
    /// Physical values per channel.
    std::vector<std::vector<double>> signals;
};

/// Reads `<dir>/<name>.hea` and its signal files. IoError naming the path
/// when a file cannot be opened.
Record read_record(const std::string& dir, const std::string& name);
std::vector<Annotation> read_annotations(const std::string& dir, const std::string& name, const std::string& ext);

/// Writes header and a single signal file named `<name>.dat` using each
/// channel's format from `header` (which must share one file).
void write_record(const std::string& dir, const RecordHeader& header, const std::vector<std::vector<int>>& adu);
void write_annotations(const std::string& dir, const std::string& name, const std::string& ext,
                       const std::vector<Annotation>& annotations);

}  // namespace blw::wfdb
