#pragma once

// Same-length 1-D dilated convolution kernels.
//
// Tap s of a K-tap kernel (K odd) with dilation rate r reads the input at
// offset (s - K/2) * (r + 1), so r = 0 is the ordinary centered convolution.
// Out-of-range taps read zero.
//
// Two implementations share one signature: the OpenMP kernels in
// blw::kernels (register-tiled, batch/channel parallel) and the plain serial
// loops in blw::reference. Results are independent of the thread count.

#include <cstddef>
#include <span>

namespace blw {

struct ConvGeometry {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel = 1;
    std::size_t dilation = 0;
    std::size_t length = 1;

    std::size_t spacing() const { return dilation + 1; }
    /// Largest |tap offset|.
    std::size_t reach() const { return (kernel / 2) * spacing(); }
    std::size_t weight_count() const { return out_channels * in_channels * kernel; }
};

/// A run of consecutive channel rows inside a batched buffer. `batch_stride`
/// is the distance between batch items, rows within an item are `length`
/// apart. Lets a branch read or write its slice of a concatenated tensor.
template <typename T>
struct ChannelBlock {
    T* base = nullptr;
    std::size_t batch_stride = 0;
    std::size_t length = 0;

    T* row(std::size_t b, std::size_t c) const { return base + b * batch_stride + c * length; }
    explicit operator bool() const { return base != nullptr; }
};

namespace kernels {

/// out = conv(in, w) + bias. With `accumulate` the result is added to the
/// existing contents of `out`. `bias` may be empty.
template <typename T>
void conv_forward(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in,
                  std::span<const T> weights, std::span<const T> bias, ChannelBlock<T> out,
                  bool accumulate = false);

/// Accumulates d(loss)/d(in) into `grad_in` (skipped when null), and the
/// weight and bias gradients into `grad_w` / `grad_b`.
template <typename T>
void conv_backward(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in,
                   std::span<const T> weights, ChannelBlock<const T> grad_out,
                   ChannelBlock<T> grad_in, std::span<T> grad_w, std::span<T> grad_b);

/// Number of OpenMP threads used by the kernels (1 when built without OpenMP).
int thread_count();
void set_thread_count(int n);

}  // namespace kernels

namespace reference {

template <typename T>
void conv_forward(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in,
                  std::span<const T> weights, std::span<const T> bias, ChannelBlock<T> out,
                  bool accumulate = false);

template <typename T>
void conv_backward(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in,
                   std::span<const T> weights, ChannelBlock<const T> grad_out,
                   ChannelBlock<T> grad_in, std::span<T> grad_w, std::span<T> grad_b);

}  // namespace reference

}  // namespace blw
