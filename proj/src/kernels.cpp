#include "blw/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blw {
namespace kernels {
namespace {

constexpr std::size_t kCoTile = 4;    // output channels per register tile
constexpr std::size_t kLenTile = 32;  // samples per register tile
constexpr std::size_t kPairTile = 4;  // (input channel, tap) pairs per weight-grad tile

using Index = std::ptrdiff_t;

/// Zero-padded copy of batch item `b`: `channels` rows of length + 2*halo.
/// The buffer is reused across calls, so only the halos are re-zeroed.
template <typename T>
void pad_item(std::size_t b, std::size_t channels, std::size_t length, std::size_t halo,
              ChannelBlock<const T> in, std::vector<T>& out) {
    const std::size_t padded = length + 2 * halo;
    out.resize(channels * padded);
    for (std::size_t c = 0; c < channels; ++c) {
        const T* src = in.row(b, c);
        T* dst = out.data() + c * padded;
        std::fill(dst, dst + halo, T(0));
        std::copy(src, src + length, dst + halo);
        std::fill(dst + halo + length, dst + padded, T(0));
    }
}

/// 64-byte SIMD vector of T. Fixed-size arrays of these stay in registers,
/// which plain scalar arrays of the same shape did not under GCC.
template <typename T>
struct Vec;
template <>
struct Vec<double> {
    typedef double type __attribute__((vector_size(64)));
};
template <>
struct Vec<float> {
    typedef float type __attribute__((vector_size(64)));
};
template <typename T>
using VecT = typename Vec<T>::type;
template <typename T>
constexpr std::size_t kVecLanes = sizeof(VecT<T>) / sizeof(T);

template <typename T>
inline VecT<T> load(const T* p) {
    VecT<T> v;
    __builtin_memcpy(&v, p, sizeof v);
    return v;
}

template <typename T>
inline void store(T* p, const VecT<T>& v) {
    __builtin_memcpy(p, &v, sizeof v);
}

template <typename T>
inline T hsum(VecT<T> v) {
    T lane[kVecLanes<T>];
    store(lane, v);
    T sum = T(0);
    for (T x : lane) sum += x;
    return sum;
}

/// One CO x kLenTile output tile. `xp` points at sample 0 of input channel 0
/// inside a padded buffer whose rows are `xstride` apart.
template <typename T, std::size_t CO>
inline void forward_tile_full(const T* xp, std::size_t xstride, std::size_t cin, const T* w,
                              std::size_t K, Index spacing, T* const* out, const T* bias,
                              bool accumulate, std::size_t i0) {
    constexpr std::size_t V = kLenTile / kVecLanes<T>;
    constexpr std::size_t lanes = kVecLanes<T>;
    const std::size_t wstride = cin * K;
    const Index half = static_cast<Index>(K / 2);
    VecT<T> acc[CO][V];
#pragma GCC unroll 8
    for (std::size_t c = 0; c < CO; ++c) {
        const T b0 = bias ? bias[c] : T(0);
#pragma GCC unroll 8
        for (std::size_t v = 0; v < V; ++v) {
            acc[c][v] = VecT<T>{} + b0;
            if (accumulate) acc[c][v] += load(out[c] + i0 + v * lanes);
        }
    }
    for (std::size_t ci = 0; ci < cin; ++ci) {
        const T* xrow = xp + ci * xstride + i0;
        const T* wrow = w + ci * K;
        for (std::size_t s = 0; s < K; ++s) {
            const T* x = xrow + (static_cast<Index>(s) - half) * spacing;
            VecT<T> xv[V];
#pragma GCC unroll 8
            for (std::size_t v = 0; v < V; ++v) xv[v] = load(x + v * lanes);
#pragma GCC unroll 8
            for (std::size_t c = 0; c < CO; ++c) {
                const T wc = wrow[c * wstride + s];
#pragma GCC unroll 8
                for (std::size_t v = 0; v < V; ++v) acc[c][v] += wc * xv[v];
            }
        }
    }
#pragma GCC unroll 8
    for (std::size_t c = 0; c < CO; ++c) {
#pragma GCC unroll 8
        for (std::size_t v = 0; v < V; ++v) store(out[c] + i0 + v * lanes, acc[c][v]);
    }
}

/// Ragged tail of fewer than kLenTile samples.
template <typename T, std::size_t CO>
inline void forward_tile_tail(const T* xp, std::size_t xstride, std::size_t cin, const T* w,
                              std::size_t K, Index spacing, T* const* out, const T* bias,
                              bool accumulate, std::size_t i0, std::size_t n) {
    const std::size_t wstride = cin * K;
    const Index half = static_cast<Index>(K / 2);
    T acc[CO][kLenTile];
    for (std::size_t c = 0; c < CO; ++c) {
        const T b0 = bias ? bias[c] : T(0);
        for (std::size_t j = 0; j < n; ++j) acc[c][j] = accumulate ? out[c][i0 + j] + b0 : b0;
    }
    for (std::size_t ci = 0; ci < cin; ++ci) {
        const T* xrow = xp + ci * xstride + i0;
        const T* wrow = w + ci * K;
        for (std::size_t s = 0; s < K; ++s) {
            const T* x = xrow + (static_cast<Index>(s) - half) * spacing;
            for (std::size_t c = 0; c < CO; ++c) {
                const T wc = wrow[c * wstride + s];
                for (std::size_t j = 0; j < n; ++j) acc[c][j] += wc * x[j];
            }
        }
    }
    for (std::size_t c = 0; c < CO; ++c) {
        for (std::size_t j = 0; j < n; ++j) out[c][i0 + j] = acc[c][j];
    }
}

template <typename T, std::size_t CO>
void forward_rows(const T* xp, std::size_t xstride, std::size_t cin, const T* w, std::size_t K,
                  Index spacing, T* const* out, const T* bias, bool accumulate,
                  std::size_t length) {
    std::size_t i0 = 0;
    for (; i0 + kLenTile <= length; i0 += kLenTile) {
        forward_tile_full<T, CO>(xp, xstride, cin, w, K, spacing, out, bias, accumulate, i0);
    }
    if (i0 < length) {
        forward_tile_tail<T, CO>(xp, xstride, cin, w, K, spacing, out, bias, accumulate, i0,
                                 length - i0);
    }
}

template <typename T>
void forward_item(const ConvGeometry& g, const T* xp, std::size_t xstride, const T* weights,
                  const T* bias, ChannelBlock<T> out, std::size_t b, bool accumulate) {
    const std::size_t cin = g.in_channels;
    const std::size_t K = g.kernel;
    const Index spacing = static_cast<Index>(g.spacing());
    for (std::size_t co0 = 0; co0 < g.out_channels; co0 += kCoTile) {
        const std::size_t nco = std::min(kCoTile, g.out_channels - co0);
        const T* w = weights + co0 * cin * K;
        const T* bs = bias ? bias + co0 : nullptr;
        T* rows[kCoTile];
        for (std::size_t c = 0; c < nco; ++c) rows[c] = out.row(b, co0 + c);
        switch (nco) {
            case 4: forward_rows<T, 4>(xp, xstride, cin, w, K, spacing, rows, bs, accumulate, g.length); break;
            case 3: forward_rows<T, 3>(xp, xstride, cin, w, K, spacing, rows, bs, accumulate, g.length); break;
            case 2: forward_rows<T, 2>(xp, xstride, cin, w, K, spacing, rows, bs, accumulate, g.length); break;
            default: forward_rows<T, 1>(xp, xstride, cin, w, K, spacing, rows, bs, accumulate, g.length); break;
        }
    }
}

/// Batch-parallel forward pass; each item is padded into a per-thread buffer.
template <typename T>
void forward_batch(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in, const T* weights,
                   const T* bias, ChannelBlock<T> out, bool accumulate) {
    const std::size_t halo = g.reach();
#pragma omp parallel
    {
        std::vector<T> padded;
#pragma omp for schedule(static)
        for (Index b = 0; b < static_cast<Index>(batch); ++b) {
            pad_item(static_cast<std::size_t>(b), g.in_channels, g.length, halo, in, padded);
            forward_item(g, padded.data() + halo, g.length + 2 * halo, weights, bias, out,
                         static_cast<std::size_t>(b), accumulate);
        }
    }
}

/// sums[c][t] = sum over the first n samples of gp[c] * xq[t], n a multiple
/// of the vector width. Sixteen named accumulators: GCC spilled an indexed
/// accumulator array to the stack on every iteration in this position.
template <typename T>
inline void weight_grad_block(const T* const* gp, const T* const* xq, std::size_t n,
                              T (&sums)[kCoTile][kPairTile]) {
    static_assert(kCoTile == 4 && kPairTile == 4);
    constexpr std::size_t lanes = kVecLanes<T>;
    using V = VecT<T>;
    V a00{}, a01{}, a02{}, a03{}, a10{}, a11{}, a12{}, a13{};
    V a20{}, a21{}, a22{}, a23{}, a30{}, a31{}, a32{}, a33{};
    for (std::size_t i = 0; i < n; i += lanes) {
        const V x0 = load(xq[0] + i), x1 = load(xq[1] + i), x2 = load(xq[2] + i), x3 = load(xq[3] + i);
        V g = load(gp[0] + i);
        a00 += g * x0; a01 += g * x1; a02 += g * x2; a03 += g * x3;
        g = load(gp[1] + i);
        a10 += g * x0; a11 += g * x1; a12 += g * x2; a13 += g * x3;
        g = load(gp[2] + i);
        a20 += g * x0; a21 += g * x1; a22 += g * x2; a23 += g * x3;
        g = load(gp[3] + i);
        a30 += g * x0; a31 += g * x1; a32 += g * x2; a33 += g * x3;
    }
    const V acc[kCoTile][kPairTile] = {
        {a00, a01, a02, a03}, {a10, a11, a12, a13}, {a20, a21, a22, a23}, {a30, a31, a32, a33}};
    for (std::size_t c = 0; c < kCoTile; ++c) {
        for (std::size_t t = 0; t < kPairTile; ++t) sums[c][t] = hsum<T>(acc[c][t]);
    }
}

/// d(loss)/d(w) contribution of one padded batch item for a kCoTile x
/// kPairTile block of (output channel, (input channel, tap)) pairs. Missing
/// rows alias the last valid one; their sums are computed and dropped.
template <typename T>
void weight_grad_tile(const ConvGeometry& g, std::size_t b, const T* padded, std::size_t halo,
                      ChannelBlock<const T> grad_out, std::size_t co0, std::size_t p0, T* grad_w) {
    constexpr std::size_t lanes = kVecLanes<T>;
    const std::size_t L = g.length;
    const std::size_t K = g.kernel;
    const std::size_t cin = g.in_channels;
    const std::size_t xstride = L + 2 * halo;
    const std::size_t nco = std::min(kCoTile, g.out_channels - co0);
    const std::size_t np = std::min(kPairTile, cin * K - p0);
    const Index spacing = static_cast<Index>(g.spacing());
    const Index half = static_cast<Index>(K / 2);

    const T* gp[kCoTile];
    const T* xq[kPairTile];
    for (std::size_t c = 0; c < kCoTile; ++c) gp[c] = grad_out.row(b, co0 + std::min(c, nco - 1));
    for (std::size_t t = 0; t < kPairTile; ++t) {
        const std::size_t p = p0 + std::min(t, np - 1);
        const Index s = static_cast<Index>(p % K);
        xq[t] = padded + (p / K) * xstride + halo + (s - half) * spacing;
    }
    T sums[kCoTile][kPairTile];
    const std::size_t body = L - L % lanes;
    weight_grad_block<T>(gp, xq, body, sums);
    for (std::size_t c = 0; c < nco; ++c) {
        for (std::size_t t = 0; t < np; ++t) {
            T sum = sums[c][t];
            for (std::size_t i = body; i < L; ++i) sum += gp[c][i] * xq[t][i];
            grad_w[(co0 + c) * cin * K + p0 + t] += sum;
        }
    }
}

}  // namespace

template <typename T>
void conv_forward(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in,
                  std::span<const T> weights, std::span<const T> bias, ChannelBlock<T> out,
                  bool accumulate) {
    forward_batch(g, batch, in, weights.data(), bias.empty() ? nullptr : bias.data(), out, accumulate);
}

template <typename T>
void conv_backward(const ConvGeometry& g, std::size_t batch, ChannelBlock<const T> in,
                   std::span<const T> weights, ChannelBlock<const T> grad_out,
                   ChannelBlock<T> grad_in, std::span<T> grad_w, std::span<T> grad_b) {
    const std::size_t L = g.length;
    const std::size_t K = g.kernel;
    const std::size_t halo = g.reach();

    if (!grad_b.empty()) {
#pragma omp parallel for schedule(static)
        for (Index co = 0; co < static_cast<Index>(g.out_channels); ++co) {
            T sum = T(0);
            for (std::size_t b = 0; b < batch; ++b) {
                const T* gr = grad_out.row(b, static_cast<std::size_t>(co));
                for (std::size_t i = 0; i < L; ++i) sum += gr[i];
            }
            grad_b[static_cast<std::size_t>(co)] += sum;
        }
    }

    if (!grad_w.empty()) {
        std::vector<T> padded;
        const std::size_t co_tiles = (g.out_channels + kCoTile - 1) / kCoTile;
        const std::size_t pair_tiles = (g.in_channels * K + kPairTile - 1) / kPairTile;
        // Batch items outermost so one item's rows stay cache resident
        // across all tiles.
        for (std::size_t b = 0; b < batch; ++b) {
            pad_item(b, g.in_channels, L, halo, in, padded);
#pragma omp parallel for collapse(2) schedule(static)
            for (Index ct = 0; ct < static_cast<Index>(co_tiles); ++ct) {
                for (Index pt = 0; pt < static_cast<Index>(pair_tiles); ++pt) {
                    weight_grad_tile(g, b, padded.data(), halo, grad_out,
                                     static_cast<std::size_t>(ct) * kCoTile,
                                     static_cast<std::size_t>(pt) * kPairTile, grad_w.data());
                }
            }
        }
    }

    if (grad_in) {
        // The input gradient is a forward convolution of grad_out with the
        // channel-transposed, tap-reversed kernel.
        const std::size_t cin = g.in_channels;
        const std::size_t cout = g.out_channels;
        std::vector<T> flipped(cin * cout * K);
        for (std::size_t co = 0; co < cout; ++co) {
            for (std::size_t ci = 0; ci < cin; ++ci) {
                for (std::size_t s = 0; s < K; ++s) {
                    flipped[(ci * cout + co) * K + (K - 1 - s)] = weights[(co * cin + ci) * K + s];
                }
            }
        }
        ConvGeometry adj = g;
        adj.in_channels = cout;
        adj.out_channels = cin;
        forward_batch(adj, batch, grad_out, flipped.data(), static_cast<const T*>(nullptr), grad_in, true);
    }
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_thread_count(int n) {
#ifdef _OPENMP
    omp_set_num_threads(std::max(1, n));
#else
    (void)n;
#endif
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

}  // namespace kernels
}  // namespace blw
