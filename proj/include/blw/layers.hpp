#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "blw/kernels.hpp"
#include "blw/tensor.hpp"

namespace blw {

enum class Activation { linear, relu };

std::string_view to_string(Activation a);

/// Which kernel implementation an op runs on.
enum class Backend { parallel, reference };

/// Weights laid out (out_channels, in_channels, kernel).
struct ConvParams {
    std::size_t out_channels = 1;
    std::size_t in_channels = 1;
    std::size_t kernel = 1;
    std::size_t dilation = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    static ConvParams zeros(std::size_t out_channels, std::size_t in_channels, std::size_t kernel,
                            std::size_t dilation = 0);

    /// Throws ConfigError for an even kernel or mis-sized buffers.
    void validate() const;

    double& weight(std::size_t co, std::size_t ci, std::size_t s) {
        return weights[(co * in_channels + ci) * kernel + s];
    }
    ConvGeometry geometry(std::size_t length) const {
        return {in_channels, out_channels, kernel, dilation, length};
    }
};

Tensor conv1d(const Tensor& input, const ConvParams& params, Backend backend = Backend::parallel);

struct ConvGrads {
    Tensor input;
    std::vector<double> weights;
    std::vector<double> bias;
};

ConvGrads conv1d_backward(const Tensor& input, const ConvParams& params, const Tensor& upstream,
                          Backend backend = Backend::parallel);

Tensor activation(const Tensor& input, Activation kind);

/// Gradient passes where input > 0 for relu (zero at exactly 0).
Tensor activation_backward(const Tensor& input, Activation kind, const Tensor& upstream);

/// Concatenate along channels in list order.
Tensor channel_concat(std::span<const Tensor> parts);

/// Inverse of channel_concat: slices `whole` into consecutive channel groups.
std::vector<Tensor> channel_split(const Tensor& whole, std::span<const std::size_t> channel_counts);

template <typename T>
ChannelBlock<const T> block_of(const BasicTensor<T>& t, std::size_t first_channel = 0) {
    return {t.data() + first_channel * t.length(), t.channels() * t.length(), t.length()};
}

template <typename T>
ChannelBlock<T> block_of(BasicTensor<T>& t, std::size_t first_channel = 0) {
    return {t.data() + first_channel * t.length(), t.channels() * t.length(), t.length()};
}

}  // namespace blw
