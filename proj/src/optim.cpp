#include "blw/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blw/error.hpp"

namespace blw {

void adam_step(ParameterStore& params, OptimizerState& state) {
    if (!(state.learning_rate > 0.0)) {
        throw ConfigError("Adam learning rate must be positive");
    }
    for (const Parameter& p : params) {
        if (p.grad.size() != p.values.size()) {
            throw ShapeError("gradient of '" + p.name + "' does not match its parameter");
        }
        for (double g : p.grad) {
            if (!std::isfinite(g)) {
                throw NumericError("non-finite gradient in parameter '" + p.name + "'");
            }
        }
    }
    if (state.first_moment.size() != params.size()) {
        state.first_moment.clear();
        state.second_moment.clear();
        for (const Parameter& p : params) {
            state.first_moment.emplace_back(p.size(), 0.0);
            state.second_moment.emplace_back(p.size(), 0.0);
        }
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = params[k];
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        if (m.size() != p.size()) throw ShapeError("Adam moments do not match '" + p.name + "'");
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double g = p.grad[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p.values[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

std::string_view to_string(ScheduleAction a) {
    switch (a) {
        case ScheduleAction::reduce_lr: return "reduce_lr";
        case ScheduleAction::stop: return "stop";
        default: return "continue";
    }
}

ScheduleAction plateau_schedule_update(ScheduleState& state, double val_metric) {
    if (!std::isfinite(val_metric)) {
        throw NumericError("validation metric is not finite");
    }
    if (val_metric < state.best_metric) {
        state.best_metric = val_metric;
        state.epochs_since_improvement = 0;
        return ScheduleAction::continue_training;
    }
    state.epochs_since_improvement += 1;
    if (state.epochs_since_improvement >= state.patience_stop) return ScheduleAction::stop;
    if (state.epochs_since_improvement % state.patience_lr == 0) return ScheduleAction::reduce_lr;
    return ScheduleAction::continue_training;
}

double reduced_learning_rate(const ScheduleState& state, double lr) {
    return std::max(lr * state.lr_factor, state.min_lr);
}

}  // namespace blw
