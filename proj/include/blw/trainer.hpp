#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "blw/dataset.hpp"
#include "blw/loss.hpp"
#include "blw/model.hpp"
#include "blw/optim.hpp"

namespace blw {

struct TrainOptions {
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double lambda = kDefaultLambda;
    std::size_t max_epochs = 100000;
    int patience_lr = 2;
    int patience_stop = 10;
    double lr_factor = 0.5;
    double min_lr = kMinLearningRate;
    std::uint64_t seed = kDefaultSeed;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_ssd = 0.0;
    double lr = 0.0;
    bool saved = false;
};

struct TrainResult {
    ModelGraph best;
    std::size_t best_epoch = 0;
    double best_val_ssd = 0.0;
    std::vector<EpochLog> log;
    /// "early-stop" or "epoch-cap".
    std::string stop_reason;
};

/// Called after each epoch; `log.saved` is set when `model` is the new best.
using EpochCallback = std::function<void(const EpochLog&, const ModelGraph& model)>;

/// Noisy inputs and clean targets of the selected pairs as (B, 1, 512).
struct BeatBatch {
    Tensor noisy;
    Tensor clean;
};
BeatBatch gather(const std::vector<const BeatPair*>& pairs, std::span<const std::size_t> index);

/// Mean per-beat SSD of the model on `pairs`.
double mean_ssd(const ModelGraph& model, const std::vector<const BeatPair*>& pairs, std::size_t batch_size = 64);

/// Adam on the filtering loss with reduce-on-plateau and early stopping, both
/// watching validation SSD. When `val` is empty the mean training loss is
/// watched instead. `model` must already be initialized; it holds the last
/// epoch's weights on return. NumericError names the epoch and step on a
/// non-finite loss.
TrainResult train_model(ModelGraph& model, const std::vector<const BeatPair*>& train,
                        const std::vector<const BeatPair*>& val, const TrainOptions& options,
                        const EpochCallback& on_epoch = {});

std::string training_log_csv(const std::vector<EpochLog>& log);

}  // namespace blw
