#include "blw/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "blw/error.hpp"
#include "blw/metrics.hpp"
#include "blw/rng.hpp"

namespace blw {

BeatBatch gather(const std::vector<const BeatPair*>& pairs, std::span<const std::size_t> index) {
    BeatBatch b{Tensor({index.size(), 1, kBeatLength}), Tensor({index.size(), 1, kBeatLength})};
    for (std::size_t i = 0; i < index.size(); ++i) {
        const BeatPair& p = *pairs[index[i]];
        std::copy(p.noisy.begin(), p.noisy.end(), b.noisy.row(i, 0).begin());
        std::copy(p.clean.samples.begin(), p.clean.samples.end(), b.clean.row(i, 0).begin());
    }
    return b;
}

double mean_ssd(const ModelGraph& model, const std::vector<const BeatPair*>& pairs, std::size_t batch_size) {
    if (pairs.empty()) return 0.0;
    std::vector<std::size_t> index(pairs.size());
    std::iota(index.begin(), index.end(), 0);
    double total = 0.0;
    for (std::size_t start = 0; start < index.size(); start += batch_size) {
        const std::size_t n = std::min(batch_size, index.size() - start);
        const BeatBatch b = gather(pairs, std::span(index).subspan(start, n));
        const Tensor y = forward(model, b.noisy);
        for (std::size_t i = 0; i < n; ++i) total += ssd(b.clean.row(i, 0), y.row(i, 0));
    }
    return total / static_cast<double>(pairs.size());
}

TrainResult train_model(ModelGraph& model, const std::vector<const BeatPair*>& train,
                        const std::vector<const BeatPair*>& val, const TrainOptions& options,
                        const EpochCallback& on_epoch) {
    if (train.empty()) throw ConfigError("training split is empty");
    if (options.batch_size == 0) throw ConfigError("batch_size must be positive");

    OptimizerState opt;
    opt.learning_rate = options.learning_rate;
    ScheduleState sched;
    sched.patience_lr = options.patience_lr;
    sched.patience_stop = options.patience_stop;
    sched.lr_factor = options.lr_factor;
    sched.min_lr = options.min_lr;

    Rng rng(derive_seed(options.seed, 10));
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result{model, 0, 0.0, {}, "epoch-cap"};
    Tensor grad;
    for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
        rng.shuffle(std::span(order));
        double loss_sum = 0.0;
        std::size_t step = 0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size, ++step) {
            const std::size_t n = std::min(options.batch_size, order.size() - start);
            const BeatBatch b = gather(train, std::span(order).subspan(start, n));
            ForwardTrace trace;
            const Tensor y = forward(model, b.noisy, trace);
            const double loss = loss_filtering(b.clean, y, options.lambda, grad);
            if (!std::isfinite(loss)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " step " +
                                   std::to_string(step));
            }
            loss_sum += loss * static_cast<double>(n);
            model.params().zero_grad();
            backward(model, b.noisy, trace, grad);
            try {
                adam_step(model.params(), opt);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + " step " +
                                   std::to_string(step));
            }
        }

        EpochLog row;
        row.epoch = epoch;
        row.train_loss = loss_sum / static_cast<double>(train.size());
        row.val_ssd = val.empty() ? row.train_loss : mean_ssd(model, val);
        row.lr = opt.learning_rate;
        if (!std::isfinite(row.val_ssd)) {
            throw NumericError("non-finite validation SSD at epoch " + std::to_string(epoch));
        }
        const ScheduleAction action = plateau_schedule_update(sched, row.val_ssd);
        row.saved = sched.epochs_since_improvement == 0;
        if (row.saved) {
            result.best = model;
            result.best_epoch = epoch;
            result.best_val_ssd = row.val_ssd;
        }
        result.log.push_back(row);
        if (on_epoch) on_epoch(row, model);
        if (action == ScheduleAction::stop) {
            result.stop_reason = "early-stop";
            break;
        }
        if (action == ScheduleAction::reduce_lr) opt.learning_rate = reduced_learning_rate(sched, opt.learning_rate);
    }
    return result;
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
    std::string out = "epoch,train_loss,val_ssd,lr,saved\n";
    char line[160];
    for (const auto& r : log) {
        std::snprintf(line, sizeof line, "%zu,%.10g,%.10g,%.6g,%d\n", r.epoch, r.train_loss, r.val_ssd, r.lr,
                      r.saved ? 1 : 0);
        out += line;
    }
    return out;
}

}  // namespace blw
