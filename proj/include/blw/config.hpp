#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blw/dataset.hpp"
#include "blw/metrics.hpp"
#include "blw/trainer.hpp"

namespace blw {

/// Which samples of a beat the metrics see.
enum class MetricWindow { full, original };
std::string_view to_string(MetricWindow w);
MetricWindow parse_metric_window(std::string_view name);

/// Every tunable of a run. Defaults are the training protocol values.
struct RunConfig {
    std::string model = "deepfilter";
    TrainOptions train;
    std::uint64_t init_seed = kDefaultSeed;
    PrdForm prd_form = PrdForm::printed;
    MetricWindow metric_window = MetricWindow::full;
    /// Single-threaded kernels. Results do not depend on the thread count
    /// either way; this only pins the schedule.
    bool deterministic = true;
    int threads = 0;
    bool float_inference = false;
    PrepareOptions prepare;
};

/// Flat `key = value` lines, `#` starts a comment. Unknown keys and bad
/// values raise ConfigError naming the line.
void apply_config_text(RunConfig& cfg, std::string_view text);
void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
RunConfig load_config(const std::string& path);

/// Every value as key/value pairs, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg);

/// Applies the thread settings to the kernels.
void apply_threading(const RunConfig& cfg);

}  // namespace blw
