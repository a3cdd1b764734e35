#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>

namespace blw {

/// Samples per beat window seen by every model.
inline constexpr std::size_t kBeatLength = 512;
/// Working sampling rate after resampling (Hz).
inline constexpr double kSamplingRate = 360.0;
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Identity of a beat across methods: source record, channel, position.
struct BeatId {
    std::string record;
    std::uint32_t channel = 0;
    std::uint32_t beat_index = 0;

    friend auto operator<=>(const BeatId&, const BeatId&) = default;
};

}  // namespace blw
