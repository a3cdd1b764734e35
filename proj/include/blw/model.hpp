#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "blw/common.hpp"
#include "blw/layers.hpp"
#include "blw/params.hpp"
#include "blw/tensor.hpp"

namespace blw {

class Rng;

enum class ModelKind { deepfilter, vanilla_l, vanilla_nl, multibranch, custom };

std::string_view to_string(ModelKind kind);
/// Accepts both "vanilla-l" and "vanilla_l" spellings. ConfigError otherwise.
ModelKind parse_model_kind(std::string_view name);

/// Kernel sizes of the multi-kernel module, in branch order.
inline constexpr std::array<std::size_t, 4> kMklanlKernels{3, 5, 9, 15};
inline constexpr std::size_t kMklanlBranches = 2 * kMklanlKernels.size();
/// Dilation used on the even-numbered modules of the dilated model.
inline constexpr std::size_t kDilatedRate = 3;
inline constexpr std::size_t kHeadKernel = 9;
inline constexpr std::size_t kVanillaKernel = 9;

/// Multi-kernel linear / non-linear filter module.
struct MklanlConfig {
    std::size_t total_filters = 64;
    std::size_t dilation = 0;

    /// ConfigError unless total_filters is a positive multiple of 8.
    void validate() const;
    std::size_t filters_per_branch() const { return total_filters / kMklanlBranches; }
};

enum class StageKind : std::uint8_t { mklanl = 0, conv = 1, head = 2 };

struct BranchSpec {
    std::string name;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 1;
    std::size_t dilation = 0;
    Activation activation = Activation::linear;
    std::size_t weight_index = 0;
    std::size_t bias_index = 0;

    ConvGeometry geometry(std::size_t length) const {
        return {in_channels, out_channels, kernel, dilation, length};
    }
};

/// Parallel branches sharing one input, outputs concatenated along channels
/// in branch order. A plain convolution is a stage with one branch.
struct Stage {
    StageKind kind = StageKind::conv;
    std::string name;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::vector<BranchSpec> branches;
};

/// Branch order: linear k3, k5, k9, k15, then relu k3, k5, k9, k15.
/// Parameters are registered in `params` under "<name>.<branch>.weight|bias".
Stage build_mklanl(const MklanlConfig& config, std::size_t in_channels, ParameterStore& params,
                   const std::string& name);

std::size_t parameter_count(const Stage& stage);

struct ModelOptions {
    std::size_t input_length = kBeatLength;
    std::vector<std::size_t> widths{64, 64, 32, 32, 16, 16};
};

/// Sequential stack of stages mapping (B, 1, L) to (B, 1, L), plus the
/// parameters the stages index into.
class ModelGraph {
public:
    explicit ModelGraph(ModelKind kind = ModelKind::custom, std::size_t input_length = kBeatLength,
                        std::size_t input_channels = 1);

    ModelKind kind() const { return kind_; }
    std::size_t input_length() const { return input_length_; }
    std::size_t input_channels() const { return input_channels_; }
    const std::vector<Stage>& stages() const { return stages_; }
    ParameterStore& params() { return params_; }
    const ParameterStore& params() const { return params_; }

    /// Channels produced by the last stage (input channels for an empty graph).
    std::size_t output_channels() const;

    void add_mklanl(const MklanlConfig& config);
    void add_conv(std::size_t out_channels, std::size_t kernel, std::size_t dilation,
                  Activation activation);
    /// Single-channel K=9 linear output convolution.
    void add_head();

    /// Out-channel count of every stage, in order.
    std::vector<std::size_t> layer_widths() const;

private:
    void add_stage(StageKind kind, const std::string& name, std::size_t out_channels,
                   std::size_t kernel, std::size_t dilation, Activation activation);

    ModelKind kind_;
    std::size_t input_length_;
    std::size_t input_channels_;
    std::vector<Stage> stages_;
    ParameterStore params_;
};

/// Zero-initialized graph of one of the four named architectures.
ModelGraph build_model(ModelKind kind, const ModelOptions& options = {});

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)) with
/// fan = channels * kernel; biases zero.
void initialize_weights(ModelGraph& model, Rng& rng);

std::size_t parameter_count(const ModelGraph& model);

/// Stage outputs recorded by a training forward pass.
struct ForwardTrace {
    std::vector<Tensor> outputs;
};

/// Inference. Input must be (B, input_channels, input_length); float evaluation converts
/// the parameters on the fly.
template <typename T>
BasicTensor<T> forward(const ModelGraph& model, const BasicTensor<T>& batch);

Tensor forward(const ModelGraph& model, const Tensor& batch, ForwardTrace& trace);

/// Accumulates parameter gradients into model.params()[i].grad. Returns the
/// gradient with respect to `batch` when `want_input_grad`, else an empty
/// tensor.
Tensor backward(ModelGraph& model, const Tensor& batch, const ForwardTrace& trace,
                const Tensor& grad_output, bool want_input_grad = false);

}  // namespace blw
