#include "blw/config.hpp"

#include <charconv>
#include <cstdio>

#include "blw/binio.hpp"
#include "blw/error.hpp"
#include "blw/kernels.hpp"
#include "blw/model.hpp"

namespace blw {

std::string_view to_string(MetricWindow w) { return w == MetricWindow::full ? "full" : "original"; }

MetricWindow parse_metric_window(std::string_view name) {
    if (name == "full") return MetricWindow::full;
    if (name == "original") return MetricWindow::original;
    throw ConfigError("unknown metric window '" + std::string(name) + "' (full|original)");
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
    T out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
    TrainOptions& t = cfg.train;
    if (key == "model") {
        cfg.model = std::string(value);
    } else if (key == "batch_size") {
        t.batch_size = parse_number<std::size_t>(key, value);
        if (t.batch_size == 0) throw ConfigError("batch_size must be positive");
    } else if (key == "learning_rate") {
        t.learning_rate = parse_number<double>(key, value);
    } else if (key == "lambda") {
        t.lambda = parse_number<double>(key, value);
    } else if (key == "max_epochs") {
        t.max_epochs = parse_number<std::size_t>(key, value);
    } else if (key == "patience_lr") {
        t.patience_lr = parse_number<int>(key, value);
    } else if (key == "patience_stop") {
        t.patience_stop = parse_number<int>(key, value);
    } else if (key == "lr_factor") {
        t.lr_factor = parse_number<double>(key, value);
    } else if (key == "min_lr") {
        t.min_lr = parse_number<double>(key, value);
    } else if (key == "seed") {
        // One seed drives data preparation, initialization and shuffling.
        const auto s = parse_number<std::uint64_t>(key, value);
        t.seed = s;
        cfg.init_seed = s;
        cfg.prepare.seed = s;
    } else if (key == "train_seed") {
        t.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "init_seed") {
        cfg.init_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "data_seed") {
        cfg.prepare.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "prd_form") {
        cfg.prd_form = parse_prd_form(value);
    } else if (key == "metric_window") {
        cfg.metric_window = parse_metric_window(value);
    } else if (key == "deterministic") {
        cfg.deterministic = parse_bool(key, value);
    } else if (key == "threads") {
        cfg.threads = parse_number<int>(key, value);
    } else if (key == "float_inference") {
        cfg.float_inference = parse_bool(key, value);
    } else if (key == "boundary_rule") {
        cfg.prepare.rule = parse_boundary_rule(value);
    } else if (key == "annotation_ext") {
        cfg.prepare.annotation_ext = std::string(value);
    } else if (key == "noise_scale") {
        cfg.prepare.scale = parse_noise_scale(value);
    } else if (key == "synth_records") {
        cfg.prepare.synth_records = parse_number<std::size_t>(key, value);
    } else if (key == "synth_beats_per_channel") {
        cfg.prepare.synth_beats_per_channel = parse_number<std::size_t>(key, value);
    } else if (key == "synth_test_beats_per_channel") {
        cfg.prepare.synth_test_beats_per_channel = parse_number<std::size_t>(key, value);
    } else if (key == "synth_noise_length") {
        cfg.prepare.synth_noise_length = parse_number<std::size_t>(key, value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        try {
            apply_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

RunConfig load_config(const std::string& path) {
    const auto bytes = read_file(path);
    RunConfig cfg;
    apply_config_text(cfg, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    return cfg;
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
    const TrainOptions& t = cfg.train;
    return {
        {"model", cfg.model},
        {"batch_size", std::to_string(t.batch_size)},
        {"learning_rate", fmt(t.learning_rate)},
        {"lambda", fmt(t.lambda)},
        {"max_epochs", std::to_string(t.max_epochs)},
        {"patience_lr", std::to_string(t.patience_lr)},
        {"patience_stop", std::to_string(t.patience_stop)},
        {"lr_factor", fmt(t.lr_factor)},
        {"min_lr", fmt(t.min_lr)},
        {"train_seed", std::to_string(t.seed)},
        {"init_seed", std::to_string(cfg.init_seed)},
        {"data_seed", std::to_string(cfg.prepare.seed)},
        {"prd_form", std::string(to_string(cfg.prd_form))},
        {"metric_window", std::string(to_string(cfg.metric_window))},
        {"std", "population"},
        {"deterministic", cfg.deterministic ? "true" : "false"},
        {"threads", std::to_string(cfg.threads)},
        {"float_inference", cfg.float_inference ? "true" : "false"},
        {"weight_init", "glorot-uniform"},
        {"boundary_rule", std::string(to_string(cfg.prepare.rule))},
        {"annotation_ext", cfg.prepare.annotation_ext},
        {"noise_scale", std::string(to_string(cfg.prepare.scale))},
    };
}

void apply_threading(const RunConfig& cfg) {
    if (cfg.deterministic) {
        kernels::set_thread_count(1);
    } else if (cfg.threads > 0) {
        kernels::set_thread_count(cfg.threads);
    }
}

}  // namespace blw
