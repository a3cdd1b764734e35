#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace blw {

struct FirParams {
    double cutoff_hz = 0.67;
    double fs_hz = 360.0;
    double beta = 2.18;
    /// Odd, so the high-pass has an integer group delay and a tap at DC-inversion center.
    std::size_t num_taps = 8079;
    double transition_hz = 0.07;
    double stopband_atten_db = 30.5;
};

struct FirDesign {
    FirParams params;
    std::vector<double> taps;
};

struct IirParams {
    std::size_t order = 4;
    double cutoff_hz = 0.67;
    double fs_hz = 360.0;
};

struct IirDesign {
    IirParams params;
    std::vector<double> b;
    /// a[0] == 1.
    std::vector<double> a;
    /// Same transfer function as second-order sections {b0, b1, b2, a1, a2}
    /// (a0 = 1); filtering runs on these for accuracy.
    std::vector<std::array<double, 5>> sos;
};

using FilterDesign = std::variant<FirDesign, IirDesign>;

/// Kaiser's estimate of tap count and beta for a stopband attenuation (dB)
/// and transition width (Hz).
struct KaiserEstimate {
    std::size_t num_taps = 0;
    double beta = 0.0;
};
KaiserEstimate kaiser_order(double atten_db, double transition_hz, double fs_hz);

double bessel_i0(double x);

/// Windowed-sinc low-pass (unit DC gain) spectrally inverted to a high-pass.
/// DesignError for cutoff outside (0, fs/2) or an even tap count.
FirDesign design_fir_highpass(const FirParams& params = {});

/// Butterworth prototype, high-pass transform with prewarping, bilinear
/// transform. DesignError for cutoff outside (0, fs/2) or unstable poles.
IirDesign design_iir_butterworth_highpass(const IirParams& params = {});

/// Roots of a (poles). Exposed for the stability check and tests.
std::vector<std::complex<double>> iir_poles(const IirDesign& d);

/// One pass with initial conditions set to the steady state of a constant
/// input equal to signal[0]. IIR passes are causal; FIR passes are centered
/// on the symmetric taps (no delay) and hold the end values beyond both ends.
std::vector<double> filter_pass(const FilterDesign& design, std::span<const double> signal);

/// Forward-backward application with odd-reflection padding of
/// min(3 * order, len - 1) samples per side; output length equals input length.
std::vector<double> zero_phase_filter(const FilterDesign& design, std::span<const double> signal);

std::vector<std::complex<double>> frequency_response(const FilterDesign& design,
                                                     std::span<const double> freqs_hz);

/// Order used for the padding rule: taps - 1 for FIR, the IIR order otherwise.
std::size_t filter_order(const FilterDesign& design);
double filter_fs(const FilterDesign& design);
std::string filter_name(const FilterDesign& design);

/// Text coefficient file: '#' header lines with the design parameters, then
/// one coefficient per line (IIR: b block then a block, each after a marker).
std::string coefficients_text(const FilterDesign& design);
void write_coefficients(const std::string& path, const FilterDesign& design);

}  // namespace blw
