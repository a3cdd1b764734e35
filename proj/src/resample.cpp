#include "blw/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "blw/error.hpp"
#include "blw/filters.hpp"

namespace blw {

std::vector<double> resample_rational(std::span<const double> x, std::size_t up, std::size_t down,
                                      const ResampleOptions& opt) {
    if (up == 0 || down == 0) throw ConfigError("resampling ratio must be positive");
    const std::size_t g = std::gcd(up, down);
    up /= g;
    down /= g;
    const std::size_t n = x.size();
    if (n == 0) return {};
    const auto out_len = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * static_cast<double>(up) / static_cast<double>(down)));
    if (n == 1) return std::vector<double>(out_len, x[0]);

    // Kernel in input-sample time; cutoff in cycles per input sample.
    const double fc = 0.5 * opt.cutoff * std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
    const long H = static_cast<long>(opt.half_width * std::max<std::size_t>(1, down / up));
    const double i0b = bessel_i0(opt.kaiser_beta);
    auto kernel = [&](double t) {
        const double r = t / static_cast<double>(H);
        if (std::abs(r) >= 1.0) return 0.0;
        const double s = t == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
        return s * bessel_i0(opt.kaiser_beta * std::sqrt(1.0 - r * r)) / i0b;
    };
    // Phase p = (m * down) mod up: output m sits at input position base + p / up.
    const std::size_t taps = static_cast<std::size_t>(2 * H);
    std::vector<std::vector<double>> phases(up, std::vector<double>(taps));
    for (std::size_t p = 0; p < up; ++p) {
        const double frac = static_cast<double>(p) / static_cast<double>(up);
        double sum = 0.0;
        for (std::size_t j = 0; j < taps; ++j) {
            const double k = static_cast<double>(static_cast<long>(j) - H + 1);
            phases[p][j] = kernel(frac - k);
            sum += phases[p][j];
        }
        for (double& w : phases[p]) w /= sum;
    }
    std::vector<double> y(out_len);
    const long last = static_cast<long>(n) - 1;
    for (std::size_t m = 0; m < out_len; ++m) {
        const std::size_t num = m * down;
        const long base = static_cast<long>(num / up);
        const auto& w = phases[num % up];
        double acc = 0.0;
        for (std::size_t j = 0; j < taps; ++j) {
            const long i = base - H + 1 + static_cast<long>(j);
            double v;
            // Odd reflection about the end samples; clamped for inputs shorter than the kernel.
            if (i < 0) v = 2.0 * x[0] - x[static_cast<std::size_t>(std::min(-i, last))];
            else if (i > last) v = 2.0 * x[static_cast<std::size_t>(last)] - x[static_cast<std::size_t>(std::max(2 * last - i, 0L))];
            else v = x[static_cast<std::size_t>(i)];
            acc += w[j] * v;
        }
        y[m] = acc;
    }
    return y;
}

std::vector<double> resample_250_to_360(std::span<const double> signal) {
    return resample_rational(signal, 36, 25);
}

}  // namespace blw
