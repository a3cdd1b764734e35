#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "blw/params.hpp"

namespace blw {

inline constexpr double kMinLearningRate = 1e-10;

/// Adam moments and hyperparameters. Moment buffers are created lazily on
/// the first step to match the parameter store they are used with.
struct OptimizerState {
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
    std::uint64_t step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One bias-corrected Adam update using the `grad` buffers of `params`.
/// Throws NumericError naming the first parameter with a non-finite gradient;
/// nothing is updated in that case.
void adam_step(ParameterStore& params, OptimizerState& state);

enum class ScheduleAction { continue_training, reduce_lr, stop };

std::string_view to_string(ScheduleAction a);

/// Reduce-on-plateau plus early stopping, both watching the same metric
/// (lower is better).
struct ScheduleState {
    double best_metric = std::numeric_limits<double>::infinity();
    int epochs_since_improvement = 0;
    int patience_lr = 2;
    int patience_stop = 10;
    double lr_factor = 0.5;
    double min_lr = kMinLearningRate;
};

/// Feeds one validation value. An improvement (strictly lower than the best
/// so far) resets the stale counter. `stop` is returned once the counter
/// reaches patience_stop; otherwise `reduce_lr` every patience_lr stale
/// epochs.
ScheduleAction plateau_schedule_update(ScheduleState& state, double val_metric);

/// Learning rate after a reduce_lr action: lr * factor, floored at min_lr.
double reduced_learning_rate(const ScheduleState& state, double lr);

}  // namespace blw
