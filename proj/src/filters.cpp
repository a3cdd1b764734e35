#include "blw/filters.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "blw/error.hpp"

namespace blw {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double bessel_i0(double x) {
    // Power series; converges quickly for the betas used here.
    double sum = 1.0, term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

KaiserEstimate kaiser_order(double atten_db, double transition_hz, double fs_hz) {
    if (!(transition_hz > 0.0) || !(fs_hz > 0.0)) throw DesignError("kaiser_order needs positive width and rate");
    const double width = 2.0 * kPi * transition_hz / fs_hz;
    KaiserEstimate e;
    e.num_taps = static_cast<std::size_t>(std::ceil((atten_db - 7.95) / (2.285 * width) + 1.0));
    if (atten_db > 50.0) {
        e.beta = 0.1102 * (atten_db - 8.7);
    } else if (atten_db > 21.0) {
        e.beta = 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    }
    return e;
}

namespace {

void check_cutoff(double cutoff, double fs) {
    if (!(fs > 0.0)) throw DesignError("sampling rate must be positive");
    if (!(cutoff > 0.0) || !(cutoff < fs / 2.0)) {
        throw DesignError("cutoff " + std::to_string(cutoff) + " Hz must lie in (0, fs/2 = " +
                          std::to_string(fs / 2.0) + ")");
    }
}

std::vector<cd> poly_from_roots(const std::vector<cd>& roots) {
    std::vector<cd> c{1.0};
    for (const cd& r : roots) {
        c.push_back(0.0);
        for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
    }
    return c;
}

}  // namespace

FirDesign design_fir_highpass(const FirParams& params) {
    check_cutoff(params.cutoff_hz, params.fs_hz);
    const std::size_t n = params.num_taps;
    if (n < 3 || n % 2 == 0) {
        throw DesignError("high-pass FIR needs an odd tap count >= 3, got " + std::to_string(n));
    }
    const std::size_t mid = n / 2;
    const double fc = params.cutoff_hz / params.fs_hz;
    const double i0_beta = bessel_i0(params.beta);
    std::vector<double> lp(n);
    double sum = 0.0;
    // Each tap pair is computed once and mirrored so symmetry is exact.
    for (std::size_t k = 0; k <= mid; ++k) {
        const double t = static_cast<double>(mid) - static_cast<double>(k);
        const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * t) / (kPi * t);
        const double ratio = t / static_cast<double>(mid);
        const double window = bessel_i0(params.beta * std::sqrt(std::max(0.0, 1.0 - ratio * ratio))) / i0_beta;
        lp[k] = lp[n - 1 - k] = sinc * window;
    }
    for (std::size_t k = 0; k < mid; ++k) sum += 2.0 * lp[k];
    sum += lp[mid];
    FirDesign d;
    d.params = params;
    d.taps.resize(n);
    for (std::size_t k = 0; k < n; ++k) d.taps[k] = -lp[k] / sum;
    d.taps[mid] += 1.0;
    return d;
}

IirDesign design_iir_butterworth_highpass(const IirParams& params) {
    check_cutoff(params.cutoff_hz, params.fs_hz);
    const std::size_t N = params.order;
    if (N == 0) throw DesignError("IIR order must be positive");
    const double fs2 = 2.0 * params.fs_hz;
    const double warped = fs2 * std::tan(kPi * params.cutoff_hz / params.fs_hz);

    // Analog prototype poles on the unit circle's left half.
    std::vector<cd> poles;
    for (std::size_t k = 0; k < N; ++k) {
        const double theta = kPi * (2.0 * static_cast<double>(k) + 1.0 + static_cast<double>(N)) /
                             (2.0 * static_cast<double>(N));
        poles.push_back(std::polar(1.0, theta));
    }
    // Low-pass to high-pass: s -> wc / s. Zeros land at s = 0.
    std::vector<cd> hp_poles;
    for (const cd& p : poles) hp_poles.push_back(warped / p);
    // Bilinear: z = (2fs + s) / (2fs - s); the N zeros at s = 0 map to z = 1.
    std::vector<cd> zp;
    cd num = 1.0, den = 1.0;
    for (const cd& p : hp_poles) {
        zp.push_back((fs2 + p) / (fs2 - p));
        num *= fs2;
        den *= fs2 - p;
    }
    // Prototype gain for the high-pass is 1 / prod(-p) = 1 for Butterworth.
    cd proto = 1.0;
    for (const cd& p : poles) proto *= -p;
    const double gain = std::real(num / den / proto);

    const auto bz = poly_from_roots(std::vector<cd>(N, cd{1.0, 0.0}));
    const auto az = poly_from_roots(zp);
    IirDesign d;
    d.params = params;
    for (const cd& c : bz) d.b.push_back(gain * c.real());
    for (const cd& c : az) d.a.push_back(c.real());
    for (const cd& p : zp) {
        if (!(std::abs(p) < 1.0)) throw DesignError("IIR design produced an unstable pole");
    }
    // Sections: conjugate pairs (upper half-plane member first), then a real
    // pole if the order is odd. The overall gain sits on the first section.
    std::vector<cd> upper;
    std::vector<double> real_poles;
    for (const cd& p : zp) {
        if (std::abs(p.imag()) < 1e-14) real_poles.push_back(p.real());
        else if (p.imag() > 0) upper.push_back(p);
    }
    double g = gain;
    for (const cd& p : upper) {
        d.sos.push_back({g, -2.0 * g, g, -2.0 * p.real(), std::norm(p)});
        g = 1.0;
    }
    for (std::size_t i = 0; i < real_poles.size(); i += 2) {
        if (i + 1 < real_poles.size()) {
            const double p0 = real_poles[i], p1 = real_poles[i + 1];
            d.sos.push_back({g, -2.0 * g, g, -(p0 + p1), p0 * p1});
        } else {
            d.sos.push_back({g, -g, 0.0, -real_poles[i], 0.0});
        }
        g = 1.0;
    }
    for (const cd& p : iir_poles(d)) {
        if (!(std::abs(p) < 1.0)) throw DesignError("IIR coefficients are numerically unstable");
    }
    return d;
}

std::vector<cd> iir_poles(const IirDesign& d) {
    // Durand-Kerner on the monic denominator.
    const std::size_t n = d.a.size() - 1;
    if (n == 0) return {};
    std::vector<cd> roots(n);
    const cd seed{0.4, 0.9};
    for (std::size_t i = 0; i < n; ++i) roots[i] = std::pow(seed, static_cast<double>(i));
    auto eval = [&](cd z) {
        cd v = 1.0;
        for (std::size_t i = 1; i <= n; ++i) v = v * z + d.a[i];
        return v;
    };
    for (int iter = 0; iter < 2000; ++iter) {
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cd denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            const cd step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-15) break;
    }
    return roots;
}

std::size_t filter_order(const FilterDesign& design) {
    if (const auto* f = std::get_if<FirDesign>(&design)) return f->taps.size() - 1;
    return std::get<IirDesign>(design).a.size() - 1;
}

double filter_fs(const FilterDesign& design) {
    if (const auto* f = std::get_if<FirDesign>(&design)) return f->params.fs_hz;
    return std::get<IirDesign>(design).params.fs_hz;
}

std::string filter_name(const FilterDesign& design) {
    return std::holds_alternative<FirDesign>(design) ? "fir" : "iir";
}

namespace {

std::vector<double> fir_pass(const std::vector<double>& taps, std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t m = taps.size();
    const std::size_t half = m / 2;
    if (n == 0) return {};
    std::vector<double> ext(n + 2 * half);
    std::fill(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(half), x[0]);
    std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(half));
    std::fill(ext.begin() + static_cast<std::ptrdiff_t>(half + n), ext.end(), x[n - 1]);
    std::vector<double> y(n);
    const double* e = ext.data();
    const double* h = taps.data();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t k = 0; k < m; ++k) acc += h[k] * e[i + k];
        y[i] = acc;
    }
    return y;
}

// Transposed direct form II per section, each started at the steady state
// of its own constant input.
std::vector<double> iir_pass(const IirDesign& d, std::span<const double> x) {
    if (d.sos.empty()) throw DesignError("IIR design carries no second-order sections");
    std::vector<double> y(x.begin(), x.end());
    if (y.empty()) return y;
    for (const auto& s : d.sos) {
        const double b0 = s[0], b1 = s[1], b2 = s[2], a1 = s[3], a2 = s[4];
        const double u = y[0];
        const double yss = (b0 + b1 + b2) / (1.0 + a1 + a2) * u;
        double z1 = (b1 + b2) * u - (a1 + a2) * yss;
        double z2 = b2 * u - a2 * yss;
        for (double& v : y) {
            const double in = v;
            const double out = b0 * in + z1;
            z1 = b1 * in + z2 - a1 * out;
            z2 = b2 * in - a2 * out;
            v = out;
        }
    }
    return y;
}

}  // namespace

std::vector<double> filter_pass(const FilterDesign& design, std::span<const double> signal) {
    if (const auto* f = std::get_if<FirDesign>(&design)) return fir_pass(f->taps, signal);
    return iir_pass(std::get<IirDesign>(design), signal);
}

std::vector<double> zero_phase_filter(const FilterDesign& design, std::span<const double> signal) {
    const std::size_t n = signal.size();
    if (n == 0) return {};
    const std::size_t pad = std::min(3 * filter_order(design), n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * signal[0] - signal[k]);
    ext.insert(ext.end(), signal.begin(), signal.end());
    for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - k]);

    std::vector<double> y = filter_pass(design, ext);
    std::reverse(y.begin(), y.end());
    y = filter_pass(design, y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<cd> frequency_response(const FilterDesign& design, std::span<const double> freqs_hz) {
    const double fs = filter_fs(design);
    std::vector<cd> out;
    out.reserve(freqs_hz.size());
    auto poly = [](const std::vector<double>& c, double w) {
        cd acc = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) acc += c[k] * std::polar(1.0, -w * static_cast<double>(k));
        return acc;
    };
    for (double f : freqs_hz) {
        const double w = 2.0 * kPi * f / fs;
        if (const auto* fir = std::get_if<FirDesign>(&design)) {
            out.push_back(poly(fir->taps, w));
        } else {
            const auto& iir = std::get<IirDesign>(design);
            out.push_back(poly(iir.b, w) / poly(iir.a, w));
        }
    }
    return out;
}

std::string coefficients_text(const FilterDesign& design) {
    std::ostringstream os;
    os.precision(17);
    auto emit = [&](const std::vector<double>& c) {
        for (double v : c) os << v << '\n';
    };
    if (const auto* f = std::get_if<FirDesign>(&design)) {
        const auto& p = f->params;
        os << "# filter fir-highpass-kaiser\n# num_taps " << f->taps.size() << "\n# cutoff_hz " << p.cutoff_hz
           << "\n# fs_hz " << p.fs_hz << "\n# beta " << p.beta << "\n# transition_hz " << p.transition_hz
           << "\n# stopband_atten_db " << p.stopband_atten_db << '\n';
        emit(f->taps);
    } else {
        const auto& d = std::get<IirDesign>(design);
        os << "# filter iir-butterworth-highpass\n# order " << d.params.order << "\n# cutoff_hz "
           << d.params.cutoff_hz << "\n# fs_hz " << d.params.fs_hz << "\n# b\n";
        emit(d.b);
        os << "# a\n";
        emit(d.a);
    }
    return os.str();
}

void write_coefficients(const std::string& path, const FilterDesign& design) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << coefficients_text(design);
    if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace blw
