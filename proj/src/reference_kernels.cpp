// Serial reference convolution. Direct evaluation of the tap sum with
// explicit bounds checks; the optimized kernels are tested against it.

#include <cstddef>

#include "blw/kernels.hpp"

namespace blw::reference {

template <typename T>
void conv_forward(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in,
                  std::span<const T> weights, std::span<const T> bias, ChannelBlock<T> out,
                  bool accumulate) {
    const auto L = static_cast<std::ptrdiff_t>(g.length);
    const auto half = static_cast<std::ptrdiff_t>(g.kernel / 2);
    const auto spacing = static_cast<std::ptrdiff_t>(g.spacing());
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t co = 0; co < g.out_channels; ++co) {
            T* y = out.row(b, co);
            for (std::ptrdiff_t i = 0; i < L; ++i) {
                T sum = bias.empty() ? T(0) : bias[co];
                for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                    const T* x = in.row(b, ci);
                    for (std::size_t s = 0; s < g.kernel; ++s) {
                        const std::ptrdiff_t j = i + (static_cast<std::ptrdiff_t>(s) - half) * spacing;
                        if (j < 0 || j >= L) continue;
                        sum += weights[(co * g.in_channels + ci) * g.kernel + s] * x[j];
                    }
                }
                y[i] = accumulate ? y[i] + sum : sum;
            }
        }
    }
}

template <typename T>
void conv_backward(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in,
                   std::span<const T> weights, ChannelBlock<const T> grad_out,
                   ChannelBlock<T> grad_in, std::span<T> grad_w, std::span<T> grad_b) {
    const auto L = static_cast<std::ptrdiff_t>(g.length);
    const auto half = static_cast<std::ptrdiff_t>(g.kernel / 2);
    const auto spacing = static_cast<std::ptrdiff_t>(g.spacing());
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t co = 0; co < g.out_channels; ++co) {
            const T* gy = grad_out.row(b, co);
            for (std::ptrdiff_t i = 0; i < L; ++i) {
                const T go = gy[i];
                if (!grad_b.empty()) grad_b[co] += go;
                for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                    const T* x = in.row(b, ci);
                    for (std::size_t s = 0; s < g.kernel; ++s) {
                        const std::ptrdiff_t j = i + (static_cast<std::ptrdiff_t>(s) - half) * spacing;
                        if (j < 0 || j >= L) continue;
                        const std::size_t widx = (co * g.in_channels + ci) * g.kernel + s;
                        if (!grad_w.empty()) grad_w[widx] += go * x[j];
                        if (grad_in) grad_in.row(b, ci)[j] += go * weights[widx];
                    }
                }
            }
        }
    }
}

template void conv_forward<float>(const ConvGeometry&, std::size_t, ChannelBlock<const float>,
                                  std::span<const float>, std::span<const float>,
                                  ChannelBlock<float>, bool);
template void conv_forward<double>(const ConvGeometry&, std::size_t, ChannelBlock<const double>,
                                   std::span<const double>, std::span<const double>,
                                   ChannelBlock<double>, bool);
template void conv_backward<float>(const ConvGeometry&, std::size_t, ChannelBlock<const float>,
                                   std::span<const float>, ChannelBlock<const float>,
                                   ChannelBlock<float>, std::span<float>, std::span<float>);
template void conv_backward<double>(const ConvGeometry&, std::size_t, ChannelBlock<const double>,
                                    std::span<const double>, ChannelBlock<const double>,
                                    ChannelBlock<double>, std::span<double>, std::span<double>);

}  // namespace blw::reference
