#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "blw/error.hpp"

namespace blw {

/// Little-endian append-only byte buffer.
class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
    /// u32 length prefix, then the bytes.
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s);
    }
    /// Fixed-width field, zero padded. Throws FormatError if `s` does not fit.
    void fixed(std::string_view s, std::size_t width) {
        if (s.size() > width) throw FormatError("'" + std::string(s) + "' exceeds " + std::to_string(width) + " bytes");
        raw(s);
        bytes_.insert(bytes_.end(), width - s.size(), 0);
    }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader; every overrun is a FormatError
/// mentioning `what`.
class ByteReader {
public:
    ByteReader(const std::vector<std::uint8_t>& bytes, std::string what)
        : data_(bytes.data()), size_(bytes.size()), what_(std::move(what)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string raw(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    std::string str(std::size_t max_len = 1 << 16) {
        const std::uint32_t n = u32();
        if (n > max_len) throw FormatError(what_ + ": string length " + std::to_string(n) + " is implausible");
        return raw(n);
    }
    /// Fixed-width zero-padded field.
    std::string fixed(std::size_t width) {
        std::string s = raw(width);
        s.resize(std::strlen(s.c_str()));
        return s;
    }
    std::size_t remaining() const { return size_ - pos_; }
    std::size_t position() const { return pos_; }
    void expect_end() const {
        if (pos_ != size_) {
            throw FormatError(what_ + ": " + std::to_string(size_ - pos_) + " unexpected trailing bytes");
        }
    }

private:
    void need(std::size_t n) const {
        if (n > size_ - pos_) {
            throw FormatError(what_ + ": truncated at byte " + std::to_string(pos_) + " (needed " +
                              std::to_string(n) + " more)");
        }
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t{data_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
/// Writes to `path.tmp` then renames, so readers never see a partial file.
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace blw
