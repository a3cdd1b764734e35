#include "blw/loss.hpp"

#include <string>

namespace blw {
namespace {

void check(const Tensor& y_true, const Tensor& y_pred, double lambda) {
    if (y_true.shape() != y_pred.shape()) {
        throw ShapeError("loss inputs differ in shape: " + to_string(y_true.shape()) + " vs " +
                         to_string(y_pred.shape()));
    }
    if (y_true.size() == 0) throw ShapeError("loss needs non-empty beats");
    if (!(lambda >= 0.0)) throw ConfigError("loss lambda must be >= 0");
}

std::span<const double> item(const Tensor& t, std::size_t b) {
    const std::size_t n = t.channels() * t.length();
    return t.values().subspan(b * n, n);
}

}  // namespace

double beat_loss(std::span<const double> y_true, std::span<const double> y_pred, double lambda) {
    if (y_true.size() != y_pred.size()) {
        throw ShapeError("beat_loss lengths differ: " + std::to_string(y_true.size()) + " vs " +
                         std::to_string(y_pred.size()));
    }
    double sum = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double d = y_true[i] - y_pred[i];
        const double sq = d * d;
        sum += sq;
        if (sq > peak) peak = sq;
    }
    return sum + lambda * peak;
}

double loss_filtering(const Tensor& y_true, const Tensor& y_pred, double lambda) {
    check(y_true, y_pred, lambda);
    double total = 0.0;
    for (std::size_t b = 0; b < y_true.batch(); ++b) {
        total += beat_loss(item(y_true, b), item(y_pred, b), lambda);
    }
    return total / static_cast<double>(y_true.batch());
}

double loss_filtering(const Tensor& y_true, const Tensor& y_pred, double lambda, Tensor& grad_pred) {
    check(y_true, y_pred, lambda);
    grad_pred = Tensor(y_pred.shape());
    const std::size_t B = y_true.batch();
    const std::size_t n = y_true.channels() * y_true.length();
    const double inv_batch = 1.0 / static_cast<double>(B);
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        auto t = item(y_true, b);
        auto p = item(y_pred, b);
        auto g = grad_pred.values().subspan(b * n, n);
        double sum = 0.0;
        double peak = -1.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = t[i] - p[i];
            const double sq = d * d;
            sum += sq;
            if (sq > peak) {
                peak = sq;
                arg = i;
            }
            g[i] = -2.0 * d * inv_batch;
        }
        g[arg] += lambda * -2.0 * (t[arg] - p[arg]) * inv_batch;
        total += sum + lambda * peak;
    }
    return total * inv_batch;
}

}  // namespace blw
