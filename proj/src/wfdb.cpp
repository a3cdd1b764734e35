#include "blw/wfdb.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "blw/binio.hpp"
#include "blw/error.hpp"

namespace blw::wfdb {
namespace {

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void bad(std::size_t line_no, const std::string& what) {
    throw ParseError("header line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T number(std::string_view s, std::size_t line_no, const char* field) {
    T v{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) bad(line_no, std::string("bad ") + field + " '" + std::string(s) + "'");
    return v;
}

double real_number(std::string_view s, std::size_t line_no, const char* field) {
    try {
        std::size_t used = 0;
        const double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        bad(line_no, std::string("bad ") + field + " '" + std::string(s) + "'");
    }
}

std::size_t bytes_needed(int format, std::size_t count) {
    return format == 212 ? (count * 3 + 1) / 2 : count * 2;
}

}  // namespace

RecordHeader parse_header(std::string_view text) {
    RecordHeader h;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected = 0;
    bool have_record = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto tok = split_ws(line);
        if (!have_record) {
            if (tok.size() < 2) bad(line_no, "record line needs a name and a signal count");
            h.name = tok[0];
            if (h.name.find('/') != std::string::npos) bad(line_no, "multi-segment records are not supported");
            expected = number<std::size_t>(tok[1], line_no, "signal count");
            if (expected == 0) bad(line_no, "signal count must be at least 1");
            if (tok.size() > 2) {
                std::string_view f = tok[2];
                f = f.substr(0, f.find_first_of("/("));
                h.fs = real_number(f, line_no, "sampling frequency");
                if (!(h.fs > 0.0)) bad(line_no, "sampling frequency must be positive");
            }
            if (tok.size() > 3) h.samples = number<std::size_t>(tok[3], line_no, "sample count");
            have_record = true;
            continue;
        }
        if (h.signals.size() == expected) continue;  // info lines after the signals
        if (tok.size() < 2) bad(line_no, "signal line needs a file name and a format");
        SignalSpec s;
        s.file = tok[0];
        std::string_view fmt = tok[1];
        if (auto plus = fmt.find('+'); plus != std::string_view::npos) {
            s.byte_offset = number<std::size_t>(fmt.substr(plus + 1), line_no, "byte offset");
            fmt = fmt.substr(0, plus);
        }
        if (fmt.find_first_of("x:") != std::string_view::npos) bad(line_no, "sample multiplicity/skew not supported");
        s.format = number<int>(fmt, line_no, "format");
        if (s.format != 212 && s.format != 16) {
            throw UnsupportedFormatError("header line " + std::to_string(line_no) + ": storage format " +
                                         std::to_string(s.format) + " is not supported (212, 16)");
        }
        bool explicit_baseline = false;
        if (tok.size() > 2) {
            std::string_view g = tok[2];
            if (auto slash = g.find('/'); slash != std::string_view::npos) {
                s.units = std::string(g.substr(slash + 1));
                g = g.substr(0, slash);
            }
            if (auto paren = g.find('('); paren != std::string_view::npos) {
                const auto close = g.find(')', paren);
                if (close == std::string_view::npos) bad(line_no, "unterminated baseline");
                s.baseline = number<int>(g.substr(paren + 1, close - paren - 1), line_no, "baseline");
                explicit_baseline = true;
                g = g.substr(0, paren);
            }
            s.gain = real_number(g, line_no, "gain");
            if (s.gain == 0.0) s.gain = kDefaultGain;
        }
        if (tok.size() > 3) s.adc_resolution = number<int>(tok[3], line_no, "ADC resolution");
        if (tok.size() > 4) s.adc_zero = number<int>(tok[4], line_no, "ADC zero");
        if (tok.size() > 5) s.initial_value = number<int>(tok[5], line_no, "initial value");
        if (!explicit_baseline) s.baseline = s.adc_zero;
        for (std::size_t i = 8; i < tok.size(); ++i) s.description += (i > 8 ? " " : "") + tok[i];
        h.signals.push_back(std::move(s));
    }
    if (!have_record) throw ParseError("header has no record line");
    if (h.signals.size() != expected) {
        throw ParseError("header declares " + std::to_string(expected) + " signals but lists " +
                         std::to_string(h.signals.size()));
    }
    return h;
}

std::string format_header(const RecordHeader& h) {
    std::ostringstream os;
    os.precision(12);
    os << h.name << ' ' << h.signals.size() << ' ' << h.fs << ' ' << h.samples << '\n';
    for (const auto& s : h.signals) {
        os << s.file << ' ' << s.format;
        if (s.byte_offset) os << '+' << s.byte_offset;
        os << ' ' << s.gain << '(' << s.baseline << ")/" << s.units << ' ' << s.adc_resolution << ' '
           << s.adc_zero << ' ' << s.initial_value << " 0 0";
        if (!s.description.empty()) os << ' ' << s.description;
        os << '\n';
    }
    return os.str();
}

namespace {

std::vector<std::size_t> members(const RecordHeader& h, const std::string& file) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < h.signals.size(); ++i)
        if (h.signals[i].file == file) idx.push_back(i);
    if (idx.empty()) throw ConfigError("no signal of record '" + h.name + "' is stored in '" + file + "'");
    for (std::size_t i : idx) {
        if (h.signals[i].format != h.signals[idx[0]].format) {
            throw UnsupportedFormatError("mixed storage formats within '" + file + "'");
        }
    }
    return idx;
}

}  // namespace

std::vector<std::vector<int>> decode_file(const RecordHeader& h, const std::string& file,
                                          const std::vector<std::uint8_t>& bytes) {
    const auto idx = members(h, file);
    const std::size_t nsig = idx.size();
    const SignalSpec& spec = h.signals[idx[0]];
    const int format = spec.format;
    if (spec.byte_offset > bytes.size()) throw LengthError("'" + file + "' is shorter than its byte offset");
    const std::uint8_t* p = bytes.data() + spec.byte_offset;
    const std::size_t avail = bytes.size() - spec.byte_offset;

    std::size_t frames = h.samples;
    if (frames == 0) {
        const std::size_t values = format == 212 ? avail * 2 / 3 : avail / 2;
        frames = values / nsig;
    }
    const std::size_t total = frames * nsig;
    if (avail < bytes_needed(format, total)) {
        throw LengthError("'" + file + "' holds " + std::to_string(avail) + " bytes, " +
                          std::to_string(bytes_needed(format, total)) + " needed for " + std::to_string(frames) +
                          " frames");
    }
    std::vector<int> flat(total);
    if (format == 212) {
        for (std::size_t k = 0; k < total; k += 2) {
            const std::uint8_t* g = p + (k / 2) * 3;
            int s1 = g[0] | ((g[1] & 0x0F) << 8);
            flat[k] = s1 >= 0x800 ? s1 - 0x1000 : s1;
            if (k + 1 < total) {
                int s2 = g[2] | ((g[1] >> 4) << 8);
                flat[k + 1] = s2 >= 0x800 ? s2 - 0x1000 : s2;
            }
        }
    } else {
        for (std::size_t k = 0; k < total; ++k) {
            flat[k] = static_cast<std::int16_t>(p[2 * k] | (p[2 * k + 1] << 8));
        }
    }
    std::vector<std::vector<int>> out(nsig, std::vector<int>(frames));
    for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t c = 0; c < nsig; ++c) out[c][f] = flat[f * nsig + c];
    return out;
}

std::vector<std::uint8_t> encode_file(const RecordHeader& h, const std::string& file,
                                      const std::vector<std::vector<int>>& adu) {
    const auto idx = members(h, file);
    if (adu.size() != idx.size()) throw ShapeError("encode_file: channel count mismatch");
    const std::size_t frames = adu.empty() ? 0 : adu[0].size();
    for (const auto& ch : adu)
        if (ch.size() != frames) throw ShapeError("encode_file: channels differ in length");
    const int format = h.signals[idx[0]].format;
    const int lo = format == 212 ? -2048 : -32768;
    const int hi = format == 212 ? 2047 : 32767;
    std::vector<int> flat;
    flat.reserve(frames * adu.size());
    for (std::size_t f = 0; f < frames; ++f)
        for (const auto& ch : adu) {
            if (ch[f] < lo || ch[f] > hi) {
                throw NumericError("sample " + std::to_string(ch[f]) + " does not fit format " + std::to_string(format));
            }
            flat.push_back(ch[f]);
        }
    std::vector<std::uint8_t> bytes(h.signals[idx[0]].byte_offset, 0);
    if (format == 212) {
        for (std::size_t k = 0; k < flat.size(); k += 2) {
            const unsigned a = static_cast<unsigned>(flat[k]) & 0xFFF;
            const unsigned b = k + 1 < flat.size() ? static_cast<unsigned>(flat[k + 1]) & 0xFFF : 0;
            bytes.push_back(static_cast<std::uint8_t>(a & 0xFF));
            bytes.push_back(static_cast<std::uint8_t>((a >> 8) | ((b >> 8) << 4)));
            if (k + 1 < flat.size()) bytes.push_back(static_cast<std::uint8_t>(b & 0xFF));
        }
    } else {
        for (int v : flat) {
            const auto u = static_cast<std::uint16_t>(v);
            bytes.push_back(static_cast<std::uint8_t>(u & 0xFF));
            bytes.push_back(static_cast<std::uint8_t>(u >> 8));
        }
    }
    return bytes;
}

double to_physical(const SignalSpec& s, int adu) { return (adu - s.baseline) / s.gain; }

int to_adu(const SignalSpec& s, double value) {
    return static_cast<int>(std::lround(value * s.gain)) + s.baseline;
}

std::vector<std::vector<double>> read_samples(const RecordHeader& h, const std::vector<std::uint8_t>& bytes) {
    if (h.signals.empty()) throw ParseError("record has no signals");
    const auto adu = decode_file(h, h.signals[0].file, bytes);
    if (adu.size() != h.signals.size()) {
        throw ConfigError("read_samples expects every signal in one file; use read_record");
    }
    std::vector<std::vector<double>> out(adu.size());
    for (std::size_t c = 0; c < adu.size(); ++c) {
        out[c].reserve(adu[c].size());
        for (int v : adu[c]) out[c].push_back(to_physical(h.signals[c], v));
    }
    return out;
}

// --- Annotations ------------------------------------------------------------

bool is_beat_code(int code) {
    switch (code) {
        case 1: case 2: case 3: case 4: case 5: case 6: case 7: case 8: case 9: case 10:
        case 11: case 12: case 13: case 25: case 30: case 34: case 35: case 38: case 41:
            return true;
        default:
            return false;
    }
}

std::vector<Annotation> parse_annotations(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() % 2 != 0) throw ParseError("annotation stream has an odd byte count");
    std::vector<Annotation> out;
    std::size_t pos = 0;
    std::int64_t time = 0;
    int chan = 0;
    int num = 0;
    auto word = [&]() -> unsigned {
        if (pos + 2 > bytes.size()) throw ParseError("annotation stream ends without a terminator");
        const unsigned w = bytes[pos] | (bytes[pos + 1] << 8);
        pos += 2;
        return w;
    };
    for (;;) {
        const unsigned w = word();
        const int code = static_cast<int>(w >> 10);
        const int field = static_cast<int>(w & 0x3FF);
        if (code == 0 && field == 0) break;
        switch (code) {
            case kSkip: {
                const unsigned hi = word();
                const unsigned lo = word();
                time += static_cast<std::int32_t>((hi << 16) | lo);
                break;
            }
            case kNum:
                num = field >= 512 ? field - 1024 : field;
                if (!out.empty()) out.back().num = num;
                break;
            case kSub:
                if (!out.empty()) out.back().subtype = field >= 512 ? field - 1024 : field;
                break;
            case kChan:
                chan = field;
                if (!out.empty()) out.back().chan = chan;
                break;
            case kAux: {
                const std::size_t padded = static_cast<std::size_t>(field) + (field & 1);
                if (pos + padded > bytes.size()) throw ParseError("auxiliary field runs past the end");
                std::string aux(reinterpret_cast<const char*>(bytes.data() + pos), static_cast<std::size_t>(field));
                pos += padded;
                if (!out.empty()) out.back().aux = std::move(aux);
                break;
            }
            default: {
                time += field;
                Annotation a;
                a.sample = time;
                a.code = code;
                a.chan = chan;
                a.num = num;
                out.push_back(std::move(a));
            }
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_annotations(const std::vector<Annotation>& annotations) {
    std::vector<std::uint8_t> b;
    auto put = [&](unsigned code, unsigned field) {
        const unsigned w = (code << 10) | (field & 0x3FF);
        b.push_back(static_cast<std::uint8_t>(w & 0xFF));
        b.push_back(static_cast<std::uint8_t>(w >> 8));
    };
    std::int64_t time = 0;
    int chan = 0;
    int num = 0;
    for (const auto& a : annotations) {
        if (a.code <= 0 || a.code > 49) throw ConfigError("annotation code " + std::to_string(a.code) + " cannot be stored");
        std::int64_t delta = a.sample - time;
        if (delta < 0 || delta > 0x3FF) {
            const auto skip = static_cast<std::uint32_t>(static_cast<std::int32_t>(delta));
            put(kSkip, 0);
            b.push_back(static_cast<std::uint8_t>((skip >> 16) & 0xFF));
            b.push_back(static_cast<std::uint8_t>((skip >> 24) & 0xFF));
            b.push_back(static_cast<std::uint8_t>(skip & 0xFF));
            b.push_back(static_cast<std::uint8_t>((skip >> 8) & 0xFF));
            delta = 0;
        }
        put(static_cast<unsigned>(a.code), static_cast<unsigned>(delta));
        time = a.sample;
        if (a.subtype != 0) put(kSub, static_cast<unsigned>(a.subtype));
        if (a.chan != chan) put(kChan, static_cast<unsigned>(a.chan));
        if (a.num != num) put(kNum, static_cast<unsigned>(a.num));
        chan = a.chan;
        num = a.num;
        if (!a.aux.empty()) {
            if (a.aux.size() > 255) throw ConfigError("auxiliary text longer than 255 bytes");
            put(kAux, static_cast<unsigned>(a.aux.size()));
            b.insert(b.end(), a.aux.begin(), a.aux.end());
            if (a.aux.size() % 2) b.push_back(0);
        }
    }
    put(0, 0);
    return b;
}

// --- Files --------------------------------------------------------------------

Record read_record(const std::string& dir, const std::string& name) {
    const auto base = std::filesystem::path(dir);
    const auto hea = read_file((base / (name + ".hea")).string());
    Record r;
    r.header = parse_header(std::string(hea.begin(), hea.end()));
    r.signals.resize(r.header.channels());
    std::map<std::string, bool> done;
    for (const auto& s : r.header.signals) {
        if (done[s.file]) continue;
        done[s.file] = true;
        const auto adu = decode_file(r.header, s.file, read_file((base / s.file).string()));
        std::size_t k = 0;
        for (std::size_t c = 0; c < r.header.channels(); ++c) {
            if (r.header.signals[c].file != s.file) continue;
            auto& out = r.signals[c];
            out.reserve(adu[k].size());
            for (int v : adu[k]) out.push_back(to_physical(r.header.signals[c], v));
            ++k;
        }
    }
    return r;
}

std::vector<Annotation> read_annotations(const std::string& dir, const std::string& name, const std::string& ext) {
    return parse_annotations(read_file((std::filesystem::path(dir) / (name + "." + ext)).string()));
}

void write_record(const std::string& dir, const RecordHeader& header, const std::vector<std::vector<int>>& adu) {
    const auto base = std::filesystem::path(dir);
    std::filesystem::create_directories(base);
    if (header.signals.empty()) throw ConfigError("record has no signals");
    write_file((base / header.signals[0].file).string(), encode_file(header, header.signals[0].file, adu));
    const std::string text = format_header(header);
    write_file((base / (header.name + ".hea")).string(), std::vector<std::uint8_t>(text.begin(), text.end()));
}

void write_annotations(const std::string& dir, const std::string& name, const std::string& ext,
                       const std::vector<Annotation>& annotations) {
    write_file((std::filesystem::path(dir) / (name + "." + ext)).string(), encode_annotations(annotations));
}

}  // namespace blw::wfdb
