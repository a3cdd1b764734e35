#pragma once

#include <span>

#include "blw/tensor.hpp"

namespace blw {

inline constexpr double kDefaultLambda = 50.0;

/// Filtering loss of one beat: sum of squared differences plus lambda times
/// the largest squared difference.
double beat_loss(std::span<const double> y_true, std::span<const double> y_pred,
                 double lambda = kDefaultLambda);

/// Mean of beat_loss over the batch; each batch item (all channels) is a beat.
double loss_filtering(const Tensor& y_true, const Tensor& y_pred, double lambda = kDefaultLambda);

/// Same value; also writes d(loss)/d(y_pred) into `grad_pred` (resized to the
/// input shape). The max term's gradient goes to the first maximal sample.
double loss_filtering(const Tensor& y_true, const Tensor& y_pred, double lambda, Tensor& grad_pred);

}  // namespace blw
