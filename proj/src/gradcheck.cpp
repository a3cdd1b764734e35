#include "blw/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "blw/rng.hpp"

namespace blw {
namespace {

double objective(const ModelGraph& model, const Tensor& input, const Tensor& probe) {
    const Tensor out = forward<double>(model, input);
    double sum = 0.0;
    auto y = out.values();
    auto p = probe.values();
    for (std::size_t i = 0; i < y.size(); ++i) sum += y[i] * p[i];
    if (!std::isfinite(sum)) throw NumericError("grad_check objective is not finite");
    return sum;
}

double relative_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / scale;
}

}  // namespace

GradCheckResult grad_check(ModelGraph& fragment, const Tensor& input, double tolerance,
                           const GradCheckOptions& options) {
    GradCheckResult result;
    result.tolerance = tolerance;

    ForwardTrace trace;
    const Tensor out = forward(fragment, input, trace);
    Tensor probe(out.shape());
    Rng rng(options.seed);
    for (double& v : probe.values()) v = rng.uniform(-1.0, 1.0);

    fragment.params().zero_grad();
    const Tensor input_grad = backward(fragment, input, trace, probe, options.check_inputs);
    if (!input_grad.all_finite()) throw NumericError("grad_check produced a non-finite gradient");

    const double h = options.step;
    auto record = [&](double analytic, double numeric, const std::string& name) {
        const double err = relative_error(analytic, numeric);
        result.entries_checked += 1;
        if (result.worst_entry.empty() || err > result.max_relative_error) {
            result.max_relative_error = err;
            result.worst_entry = name;
        }
    };

    for (Parameter& p : fragment.params()) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p.values[i];
            p.values[i] = saved + h;
            const double up = objective(fragment, input, probe);
            p.values[i] = saved - h;
            const double down = objective(fragment, input, probe);
            p.values[i] = saved;
            record(p.grad[i], (up - down) / (2.0 * h), p.name + "[" + std::to_string(i) + "]");
        }
    }

    if (options.check_inputs) {
        Tensor x = input;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double saved = x.values()[i];
            x.values()[i] = saved + h;
            const double up = objective(fragment, x, probe);
            x.values()[i] = saved - h;
            const double down = objective(fragment, x, probe);
            x.values()[i] = saved;
            record(input_grad.values()[i], (up - down) / (2.0 * h),
                   "input[" + std::to_string(i) + "]");
        }
    }
    return result;
}

}  // namespace blw
