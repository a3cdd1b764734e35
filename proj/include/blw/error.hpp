#pragma once

#include <stdexcept>
#include <string>

namespace blw {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define BLW_DEFINE_ERROR(Name, tag)                                            \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& message) : Error(tag, message) {}     \
    }

BLW_DEFINE_ERROR(ShapeError, "shape");
BLW_DEFINE_ERROR(ConfigError, "config");
BLW_DEFINE_ERROR(NumericError, "numeric");
BLW_DEFINE_ERROR(FormatError, "format");
BLW_DEFINE_ERROR(CompatibilityError, "compatibility");
BLW_DEFINE_ERROR(ParseError, "parse");
BLW_DEFINE_ERROR(UnsupportedFormatError, "unsupported-format");
BLW_DEFINE_ERROR(LengthError, "length");
BLW_DEFINE_ERROR(InsufficientDataError, "insufficient-data");
BLW_DEFINE_ERROR(UndefinedMetricError, "undefined-metric");
BLW_DEFINE_ERROR(ConsistencyError, "consistency");
BLW_DEFINE_ERROR(DesignError, "design");
BLW_DEFINE_ERROR(MissingRecordError, "missing-record");
BLW_DEFINE_ERROR(IoError, "io");

#undef BLW_DEFINE_ERROR

}  // namespace blw
