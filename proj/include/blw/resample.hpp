#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace blw {

struct ResampleOptions {
    /// Half-width of the interpolation kernel in input samples.
    std::size_t half_width = 32;
    double kaiser_beta = 8.0;
    /// Cutoff as a fraction of the lower of the two Nyquist rates.
    double cutoff = 1.0;
};

/// Rational-ratio windowed-sinc resampler (polyphase: one normalized kernel
/// per output phase). Output length is round(len * up / down); constants map
/// to constants; ends use odd reflection.
std::vector<double> resample_rational(std::span<const double> signal, std::size_t up, std::size_t down,
                                      const ResampleOptions& options = {});

/// 250 Hz to 360 Hz (ratio 36/25).
std::vector<double> resample_250_to_360(std::span<const double> signal);

}  // namespace blw
