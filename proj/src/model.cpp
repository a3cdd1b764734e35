#include "blw/model.hpp"

#include <algorithm>
#include <cmath>

#include "blw/kernels.hpp"
#include "blw/rng.hpp"

namespace blw {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::deepfilter: return "deepfilter";
        case ModelKind::vanilla_l: return "vanilla-l";
        case ModelKind::vanilla_nl: return "vanilla-nl";
        case ModelKind::multibranch: return "multibranch";
        case ModelKind::custom: return "custom";
    }
    return "custom";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "deepfilter") return ModelKind::deepfilter;
    if (name == "vanilla-l" || name == "vanilla_l") return ModelKind::vanilla_l;
    if (name == "vanilla-nl" || name == "vanilla_nl") return ModelKind::vanilla_nl;
    if (name == "multibranch") return ModelKind::multibranch;
    if (name == "custom") return ModelKind::custom;
    throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

void MklanlConfig::validate() const {
    if (total_filters == 0 || total_filters % kMklanlBranches != 0) {
        throw ConfigError("MKLANL filter count must be a positive multiple of 8, got " +
                          std::to_string(total_filters));
    }
}

Stage build_mklanl(const MklanlConfig& config, std::size_t in_channels, ParameterStore& params,
                   const std::string& name) {
    config.validate();
    if (in_channels == 0) throw ConfigError("MKLANL module needs at least one input channel");
    Stage stage;
    stage.kind = StageKind::mklanl;
    stage.name = name;
    stage.in_channels = in_channels;
    stage.out_channels = config.total_filters;
    const std::size_t per_branch = config.filters_per_branch();
    for (Activation act : {Activation::linear, Activation::relu}) {
        for (std::size_t k : kMklanlKernels) {
            BranchSpec br;
            br.name = std::string(act == Activation::linear ? "lin" : "relu") + "_k" + std::to_string(k);
            br.in_channels = in_channels;
            br.out_channels = per_branch;
            br.kernel = k;
            br.dilation = config.dilation;
            br.activation = act;
            br.weight_index = params.add(name + "." + br.name + ".weight", {per_branch, in_channels, k});
            br.bias_index = params.add(name + "." + br.name + ".bias", {per_branch});
            stage.branches.push_back(std::move(br));
        }
    }
    return stage;
}

std::size_t parameter_count(const Stage& stage) {
    std::size_t n = 0;
    for (const auto& br : stage.branches) {
        n += br.out_channels * br.in_channels * br.kernel + br.out_channels;
    }
    return n;
}

ModelGraph::ModelGraph(ModelKind kind, std::size_t input_length, std::size_t input_channels)
    : kind_(kind), input_length_(input_length), input_channels_(input_channels) {
    if (input_length == 0) throw ConfigError("model input length must be >= 1");
    if (input_channels == 0) throw ConfigError("model needs at least one input channel");
}

std::size_t ModelGraph::output_channels() const {
    return stages_.empty() ? input_channels_ : stages_.back().out_channels;
}

void ModelGraph::add_mklanl(const MklanlConfig& config) {
    const std::string name = "mklanl" + std::to_string(stages_.size() + 1);
    stages_.push_back(build_mklanl(config, output_channels(), params_, name));
}

void ModelGraph::add_conv(std::size_t out_channels, std::size_t kernel, std::size_t dilation,
                          Activation activation) {
    add_stage(StageKind::conv, "conv" + std::to_string(stages_.size() + 1), out_channels, kernel,
              dilation, activation);
}

void ModelGraph::add_head() {
    add_stage(StageKind::head, "head", 1, kHeadKernel, 0, Activation::linear);
}

void ModelGraph::add_stage(StageKind kind, const std::string& name, std::size_t out_channels,
                           std::size_t kernel, std::size_t dilation, Activation activation) {
    if (kernel % 2 == 0) {
        throw ConfigError("convolution kernel size must be odd, got " + std::to_string(kernel));
    }
    if (out_channels == 0) throw ConfigError("convolution needs at least one output channel");
    Stage stage;
    stage.kind = kind;
    stage.name = name;
    stage.in_channels = output_channels();
    stage.out_channels = out_channels;
    BranchSpec br;
    br.name = "conv";
    br.in_channels = stage.in_channels;
    br.out_channels = out_channels;
    br.kernel = kernel;
    br.dilation = dilation;
    br.activation = activation;
    br.weight_index = params_.add(name + ".weight", {out_channels, stage.in_channels, kernel});
    br.bias_index = params_.add(name + ".bias", {out_channels});
    stage.branches.push_back(std::move(br));
    stages_.push_back(std::move(stage));
}

std::vector<std::size_t> ModelGraph::layer_widths() const {
    std::vector<std::size_t> widths;
    for (const auto& s : stages_) widths.push_back(s.out_channels);
    return widths;
}

ModelGraph build_model(ModelKind kind, const ModelOptions& options) {
    ModelGraph model(kind, options.input_length);
    switch (kind) {
        case ModelKind::deepfilter:
        case ModelKind::multibranch:
            for (std::size_t i = 0; i < options.widths.size(); ++i) {
                const bool dilated = kind == ModelKind::deepfilter && i % 2 == 1;
                model.add_mklanl({options.widths[i], dilated ? kDilatedRate : 0});
            }
            break;
        case ModelKind::vanilla_l:
        case ModelKind::vanilla_nl: {
            const Activation act =
                kind == ModelKind::vanilla_l ? Activation::linear : Activation::relu;
            for (std::size_t w : options.widths) model.add_conv(w, kVanillaKernel, 0, act);
            break;
        }
        case ModelKind::custom:
            throw ConfigError("build_model cannot build a custom graph; add stages directly");
    }
    model.add_head();
    return model;
}

void initialize_weights(ModelGraph& model, Rng& rng) {
    for (const Stage& stage : model.stages()) {
        for (const BranchSpec& br : stage.branches) {
            const double fan_in = static_cast<double>(br.in_channels * br.kernel);
            const double fan_out = static_cast<double>(br.out_channels * br.kernel);
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            for (double& w : model.params()[br.weight_index].values) w = rng.uniform(-limit, limit);
            auto& bias = model.params()[br.bias_index].values;
            std::fill(bias.begin(), bias.end(), 0.0);
        }
    }
}

std::size_t parameter_count(const ModelGraph& model) {
    std::size_t n = 0;
    for (const Stage& s : model.stages()) n += parameter_count(s);
    return n;
}

namespace {

void check_batch(const ModelGraph& model, const Shape& shape) {
    if (shape.channels != model.input_channels() || shape.length != model.input_length() ||
        shape.batch == 0) {
        throw ShapeError("model expects input (B, " + std::to_string(model.input_channels()) +
                         ", " + std::to_string(model.input_length()) + "), got " +
                         to_string(shape));
    }
}

/// Parameters as spans of T; converted copies only for float.
template <typename T>
struct ParamView {
    std::vector<std::vector<T>> owned;
    std::vector<std::span<const T>> spans;

    explicit ParamView(const ParameterStore& store) {
        if constexpr (std::is_same_v<T, double>) {
            for (const Parameter& p : store) spans.emplace_back(p.values);
        } else {
            owned.reserve(store.size());
            for (const Parameter& p : store) {
                owned.emplace_back(p.values.begin(), p.values.end());
                spans.emplace_back(owned.back());
            }
        }
    }
};

template <typename T>
BasicTensor<T> stage_forward(const Stage& stage, const ParamView<T>& params,
                             const BasicTensor<T>& input) {
    const std::size_t B = input.batch();
    const std::size_t L = input.length();
    BasicTensor<T> out({B, stage.out_channels, L});
    std::size_t offset = 0;
    for (const BranchSpec& br : stage.branches) {
        kernels::conv_forward<T>(br.geometry(L), B, block_of(input), params.spans[br.weight_index],
                                 params.spans[br.bias_index], block_of(out, offset));
        if (br.activation == Activation::relu) {
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t c = offset; c < offset + br.out_channels; ++c) {
                    for (T& v : out.row(b, c)) v = v > T(0) ? v : T(0);
                }
            }
        }
        offset += br.out_channels;
    }
    return out;
}

}  // namespace

template <typename T>
BasicTensor<T> forward(const ModelGraph& model, const BasicTensor<T>& batch) {
    check_batch(model, batch.shape());
    const ParamView<T> params(model.params());
    BasicTensor<T> x = batch;
    x.drop_grad();
    for (const Stage& stage : model.stages()) x = stage_forward(stage, params, x);
    return x;
}

template TensorF forward<float>(const ModelGraph&, const TensorF&);
template Tensor forward<double>(const ModelGraph&, const Tensor&);

Tensor forward(const ModelGraph& model, const Tensor& batch, ForwardTrace& trace) {
    check_batch(model, batch.shape());
    const ParamView<double> params(model.params());
    trace.outputs.clear();
    trace.outputs.reserve(model.stages().size());
    const Tensor* x = &batch;
    for (const Stage& stage : model.stages()) {
        trace.outputs.push_back(stage_forward(stage, params, *x));
        x = &trace.outputs.back();
    }
    Tensor out = *x;
    out.drop_grad();
    return out;
}

Tensor backward(ModelGraph& model, const Tensor& batch, const ForwardTrace& trace,
                const Tensor& grad_output, bool want_input_grad) {
    const auto& stages = model.stages();
    if (trace.outputs.size() != stages.size()) {
        throw ShapeError("forward trace does not belong to this model");
    }
    const Shape out_shape = stages.empty() ? batch.shape() : trace.outputs.back().shape();
    if (grad_output.shape() != out_shape) {
        throw ShapeError("output gradient " + to_string(grad_output.shape()) +
                         " does not match model output " + to_string(out_shape));
    }
    if (stages.empty()) return want_input_grad ? grad_output : Tensor();

    Tensor grad = grad_output;
    grad.drop_grad();
    for (std::size_t k = stages.size(); k-- > 0;) {
        const Stage& stage = stages[k];
        const Tensor& output = trace.outputs[k];
        const Tensor& input = k == 0 ? batch : trace.outputs[k - 1];
        const std::size_t B = input.batch();
        const std::size_t L = input.length();

        // Relu mask: output > 0 exactly where the pre-activation was > 0.
        std::size_t offset = 0;
        for (const BranchSpec& br : stage.branches) {
            if (br.activation == Activation::relu) {
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t c = offset; c < offset + br.out_channels; ++c) {
                        auto y = output.row(b, c);
                        auto g = grad.row(b, c);
                        for (std::size_t i = 0; i < L; ++i) {
                            if (!(y[i] > 0.0)) g[i] = 0.0;
                        }
                    }
                }
            }
            offset += br.out_channels;
        }

        const bool need_input = k > 0 || want_input_grad;
        Tensor grad_in = need_input ? Tensor(input.shape()) : Tensor();
        offset = 0;
        for (const BranchSpec& br : stage.branches) {
            Parameter& w = model.params()[br.weight_index];
            Parameter& bias = model.params()[br.bias_index];
            ChannelBlock<double> gin = need_input ? block_of(grad_in) : ChannelBlock<double>{};
            kernels::conv_backward<double>(br.geometry(L), B, block_of(input),
                                           std::span<const double>(w.values),
                                           block_of(std::as_const(grad), offset), gin, w.grad,
                                           bias.grad);
            offset += br.out_channels;
        }
        grad = std::move(grad_in);
    }
    return grad;
}

}  // namespace blw
