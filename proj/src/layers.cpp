#include "blw/layers.hpp"

#include <algorithm>
#include <string>

namespace blw {

std::string_view to_string(Activation a) {
    return a == Activation::relu ? "relu" : "linear";
}

ConvParams ConvParams::zeros(std::size_t out_channels, std::size_t in_channels, std::size_t kernel,
                             std::size_t dilation) {
    ConvParams p;
    p.out_channels = out_channels;
    p.in_channels = in_channels;
    p.kernel = kernel;
    p.dilation = dilation;
    p.weights.assign(out_channels * in_channels * kernel, 0.0);
    p.bias.assign(out_channels, 0.0);
    return p;
}

void ConvParams::validate() const {
    if (kernel == 0 || kernel % 2 == 0) {
        throw ConfigError("convolution kernel size must be odd, got " + std::to_string(kernel));
    }
    if (out_channels == 0 || in_channels == 0) {
        throw ConfigError("convolution needs at least one input and one output channel");
    }
    if (weights.size() != out_channels * in_channels * kernel) {
        throw ConfigError("convolution weights hold " + std::to_string(weights.size()) +
                          " values, expected " +
                          std::to_string(out_channels * in_channels * kernel));
    }
    if (bias.size() != out_channels) {
        throw ConfigError("convolution bias holds " + std::to_string(bias.size()) +
                          " values, expected " + std::to_string(out_channels));
    }
}

namespace {

void check_input(const Tensor& input, const ConvParams& params) {
    params.validate();
    if (input.channels() != params.in_channels) {
        throw ShapeError("conv1d expects " + std::to_string(params.in_channels) +
                         " input channels, got tensor " + to_string(input.shape()));
    }
    if (input.length() == 0) throw ShapeError("conv1d input length must be >= 1");
}

}  // namespace

Tensor conv1d(const Tensor& input, const ConvParams& params, Backend backend) {
    check_input(input, params);
    Tensor out({input.batch(), params.out_channels, input.length()});
    const auto g = params.geometry(input.length());
    if (backend == Backend::parallel) {
        kernels::conv_forward<double>(g, input.batch(), block_of(input), params.weights,
                                      params.bias, block_of(out));
    } else {
        reference::conv_forward<double>(g, input.batch(), block_of(input), params.weights,
                                        params.bias, block_of(out));
    }
    return out;
}

ConvGrads conv1d_backward(const Tensor& input, const ConvParams& params, const Tensor& upstream,
                          Backend backend) {
    check_input(input, params);
    const Shape expected{input.batch(), params.out_channels, input.length()};
    if (upstream.shape() != expected) {
        throw ShapeError("conv1d_backward upstream gradient " + to_string(upstream.shape()) +
                         " does not match output shape " + to_string(expected));
    }
    ConvGrads grads{Tensor(input.shape()), std::vector<double>(params.weights.size(), 0.0),
                    std::vector<double>(params.bias.size(), 0.0)};
    const auto g = params.geometry(input.length());
    if (backend == Backend::parallel) {
        kernels::conv_backward<double>(g, input.batch(), block_of(input), params.weights,
                                       block_of(upstream), block_of(grads.input), grads.weights,
                                       grads.bias);
    } else {
        reference::conv_backward<double>(g, input.batch(), block_of(input), params.weights,
                                         block_of(upstream), block_of(grads.input),
                                         grads.weights, grads.bias);
    }
    return grads;
}

Tensor activation(const Tensor& input, Activation kind) {
    Tensor out = input;
    out.drop_grad();
    if (kind == Activation::relu) {
        for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    }
    return out;
}

Tensor activation_backward(const Tensor& input, Activation kind, const Tensor& upstream) {
    if (input.shape() != upstream.shape()) {
        throw ShapeError("activation_backward shapes differ: " + to_string(input.shape()) +
                         " vs " + to_string(upstream.shape()));
    }
    Tensor grad = upstream;
    grad.drop_grad();
    if (kind == Activation::relu) {
        auto x = input.values();
        auto g = grad.values();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!(x[i] > 0.0)) g[i] = 0.0;
        }
    }
    return grad;
}

Tensor channel_concat(std::span<const Tensor> parts) {
    if (parts.empty()) throw ShapeError("channel_concat needs at least one part");
    const std::size_t B = parts.front().batch();
    const std::size_t L = parts.front().length();
    std::size_t channels = 0;
    for (const Tensor& p : parts) {
        if (p.batch() != B || p.length() != L) {
            throw ShapeError("channel_concat part " + to_string(p.shape()) +
                             " does not match batch/length of " + to_string(parts.front().shape()));
        }
        channels += p.channels();
    }
    Tensor out({B, channels, L});
    for (std::size_t b = 0; b < B; ++b) {
        std::size_t offset = 0;
        for (const Tensor& p : parts) {
            for (std::size_t c = 0; c < p.channels(); ++c) {
                auto src = p.row(b, c);
                std::copy(src.begin(), src.end(), out.row(b, offset + c).begin());
            }
            offset += p.channels();
        }
    }
    return out;
}

std::vector<Tensor> channel_split(const Tensor& whole, std::span<const std::size_t> channel_counts) {
    std::size_t total = 0;
    for (std::size_t c : channel_counts) total += c;
    if (total != whole.channels()) {
        throw ShapeError("channel_split counts sum to " + std::to_string(total) + " but tensor " +
                         to_string(whole.shape()) + " has " + std::to_string(whole.channels()));
    }
    std::vector<Tensor> parts;
    parts.reserve(channel_counts.size());
    std::size_t offset = 0;
    for (std::size_t count : channel_counts) {
        Tensor part({whole.batch(), count, whole.length()});
        for (std::size_t b = 0; b < whole.batch(); ++b) {
            for (std::size_t c = 0; c < count; ++c) {
                auto src = whole.row(b, offset + c);
                std::copy(src.begin(), src.end(), part.row(b, c).begin());
            }
        }
        parts.push_back(std::move(part));
        offset += count;
    }
    return parts;
}

}  // namespace blw
