#include <cmath>
#include <vector>

#include "blw/error.hpp"
#include "blw/optim.hpp"
#include "doctest.h"

using namespace blw;

namespace {

ParameterStore one_param(double value, double grad) {
    ParameterStore store;
    const auto i = store.add("w", {1});
    store[i].values[0] = value;
    store[i].grad[0] = grad;
    return store;
}

}  // namespace

TEST_CASE("first Adam step moves by about the learning rate") {
    for (double g : {3.0, -0.25, 1e-3}) {
        ParameterStore store = one_param(1.0, g);
        OptimizerState st;
        adam_step(store, st);
        // m_hat = g, v_hat = g^2: step is lr * g / (|g| + eps).
        const double expect = 1.0 - 1e-3 * g / (std::abs(g) + 1e-8);
        CHECK(store[0].values[0] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    ParameterStore store = one_param(0.7, 0.0);
    OptimizerState st;
    for (int i = 0; i < 5; ++i) adam_step(store, st);
    CHECK(store[0].values[0] == 0.7);
}

TEST_CASE("Adam is deterministic") {
    auto run = [] {
        ParameterStore store = one_param(1.0, 0.0);
        OptimizerState st;
        for (int i = 0; i < 20; ++i) {
            store[0].grad[0] = std::sin(static_cast<double>(i)) + store[0].values[0];
            adam_step(store, st);
        }
        return store[0].values[0];
    };
    CHECK(run() == run());
}

TEST_CASE("non-finite gradient is reported and nothing moves") {
    ParameterStore store;
    store.add("a", {1});
    store.add("b.weight", {2});
    store[0].grad[0] = 1.0;
    store[1].grad[1] = std::numeric_limits<double>::infinity();
    OptimizerState st;
    try {
        adam_step(store, st);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("b.weight") != std::string::npos);
    }
    CHECK(store[0].values[0] == 0.0);
}

TEST_CASE("plateau schedule") {
    SUBCASE("steadily improving never acts") {
        ScheduleState s;
        for (int i = 0; i < 30; ++i) CHECK(plateau_schedule_update(s, 100.0 - i) == ScheduleAction::continue_training);
    }
    SUBCASE("flat metric: reduce every second stale epoch, stop at the tenth") {
        ScheduleState s;
        std::vector<ScheduleAction> got;
        for (int i = 0; i < 11; ++i) got.push_back(plateau_schedule_update(s, 5.0));
        using A = ScheduleAction;
        const std::vector<A> want{A::continue_training, A::continue_training, A::reduce_lr,
                                  A::continue_training, A::reduce_lr,         A::continue_training,
                                  A::reduce_lr,         A::continue_training, A::reduce_lr,
                                  A::continue_training, A::stop};
        CHECK(got == want);
    }
    SUBCASE("an improvement resets the counter") {
        ScheduleState s;
        plateau_schedule_update(s, 5.0);
        plateau_schedule_update(s, 6.0);
        CHECK(plateau_schedule_update(s, 4.0) == ScheduleAction::continue_training);
        CHECK(s.epochs_since_improvement == 0);
        CHECK(plateau_schedule_update(s, 4.0) == ScheduleAction::continue_training);
        CHECK(plateau_schedule_update(s, 4.0) == ScheduleAction::reduce_lr);
    }
    SUBCASE("learning-rate floor") {
        ScheduleState s;
        CHECK(reduced_learning_rate(s, 1e-3) == 5e-4);
        CHECK(reduced_learning_rate(s, 1.5e-10) == kMinLearningRate);
    }
    SUBCASE("non-finite metric") {
        ScheduleState s;
        CHECK_THROWS_AS(plateau_schedule_update(s, std::nan("")), NumericError);
    }
}
