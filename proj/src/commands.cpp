#include "blw/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "blw/binio.hpp"
#include "blw/checkpoint.hpp"
#include "blw/error.hpp"
#include "blw/filters.hpp"
#include "blw/kernels.hpp"
#include "blw/rng.hpp"

#ifndef BLW_BUILD_ID
#define BLW_BUILD_ID "unknown"
#endif

namespace blw {

std::string_view build_id() { return BLW_BUILD_ID; }

namespace {

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string as_text(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

void write_text(const std::string& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

/// Restores the kernel thread count on scope exit.
struct ThreadScope {
    int saved = kernels::thread_count();
    ~ThreadScope() { kernels::set_thread_count(saved); }
};

ModelKind model_kind_of(std::string_view name) {
    const ModelKind kind = parse_model_kind(name);
    if (kind == ModelKind::custom) throw ConfigError("method '" + std::string(name) + "' is not a trainable model");
    return kind;
}

Tensor stack_inputs(const std::vector<const BeatPair*>& beats, std::size_t start, std::size_t n) {
    Tensor x({n, 1, kBeatLength});
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = beats[start + i]->noisy;
        std::copy(v.begin(), v.end(), x.row(i, 0).begin());
    }
    return x;
}

std::vector<std::vector<double>> model_outputs(const ModelGraph& model, const std::vector<const BeatPair*>& beats,
                                               bool use_float) {
    constexpr std::size_t kBatch = 64;
    std::vector<std::vector<double>> out;
    out.reserve(beats.size());
    for (std::size_t start = 0; start < beats.size(); start += kBatch) {
        const std::size_t n = std::min(kBatch, beats.size() - start);
        const Tensor x = stack_inputs(beats, start, n);
        if (use_float) {
            const TensorF xf({n, 1, kBeatLength}, std::vector<float>(x.values().begin(), x.values().end()));
            const TensorF y = forward(model, xf);
            for (std::size_t i = 0; i < n; ++i) out.emplace_back(y.row(i, 0).begin(), y.row(i, 0).end());
        } else {
            const Tensor y = forward(model, x);
            for (std::size_t i = 0; i < n; ++i) out.emplace_back(y.row(i, 0).begin(), y.row(i, 0).end());
        }
    }
    return out;
}

std::vector<std::vector<double>> stream_outputs(const FilterDesign& design, const std::vector<const BeatPair*>& beats) {
    std::map<std::pair<std::string, std::uint32_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < beats.size(); ++i) {
        const BeatId& id = beats[i]->clean.id;
        groups[{id.record, id.channel}].push_back(i);
    }
    std::vector<std::vector<double>> out(beats.size());
    for (auto& [key, idx] : groups) {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return beats[a]->clean.id.beat_index < beats[b]->clean.id.beat_index;
        });
        std::vector<double> stream;
        for (std::size_t i : idx) {
            const auto& p = *beats[i];
            stream.insert(stream.end(), p.noisy.begin(), p.noisy.begin() + p.clean.original_length);
        }
        const std::vector<double> filtered = zero_phase_filter(design, stream);
        std::size_t pos = 0;
        for (std::size_t i : idx) {
            const std::size_t len = beats[i]->clean.original_length;
            std::vector<double> w(kBeatLength, 0.0);
            std::copy(filtered.begin() + static_cast<std::ptrdiff_t>(pos),
                      filtered.begin() + static_cast<std::ptrdiff_t>(pos + len), w.begin());
            out[i] = std::move(w);
            pos += len;
        }
    }
    return out;
}

FilterDesign classical_design(std::string_view name) {
    if (name == "fir") return design_fir_highpass();
    return design_iir_butterworth_highpass();
}

ModelGraph load_model(const MethodSpec& m) {
    if (m.checkpoint.empty()) throw ConfigError("method '" + m.name + "' needs a checkpoint");
    return load_checkpoint(m.checkpoint, model_kind_of(m.name)).model;
}

std::string dataset_fingerprint(const std::string& path) { return hex(fnv1a(as_text(read_file(path)))); }

std::vector<const BeatPair*> test_beats(const Dataset& d) {
    auto beats = d.select(Split::test);
    if (beats.empty()) throw ConfigError("test split is empty");
    return beats;
}

}  // namespace

// --- prepare -----------------------------------------------------------------

PrepareResult cmd_prepare(const RunConfig& cfg, const PrepareArgs& args) {
    PrepareResult r;
    if (args.synthetic) {
        r.dataset = prepare_synthetic(cfg.prepare);
    } else {
        if (args.qt_dir.empty() || args.nstdb_dir.empty()) {
            throw ConfigError("prepare needs --qt-dir and --nstdb-dir, or --synthetic");
        }
        r.dataset = prepare_physionet(args.qt_dir, args.nstdb_dir, cfg.prepare);
    }
    std::size_t degenerate = 0;
    for (const auto& p : r.dataset.pairs) degenerate += p.degenerate;
    r.counts = "train=" + std::to_string(r.dataset.count(Split::train)) +
               " val=" + std::to_string(r.dataset.count(Split::val)) +
               " test=" + std::to_string(r.dataset.count(Split::test)) + " degenerate=" + std::to_string(degenerate);
    if (!args.out.empty()) save_dataset(args.out, r.dataset);
    return r;
}

// --- train -------------------------------------------------------------------

TrainResult cmd_train(const RunConfig& cfg, const TrainArgs& args,
                      const std::function<void(const EpochLog&)>& progress) {
    if (args.checkpoint_out.empty()) throw ConfigError("train needs an output checkpoint path");
    const ModelKind kind = model_kind_of(cfg.model);
    const Dataset data = load_dataset(args.dataset);
    const auto train = data.select(Split::train);
    const auto val = data.select(Split::val);

    ThreadScope threads;
    apply_threading(cfg);
    ModelGraph model = build_model(kind);
    Rng rng(derive_seed(cfg.init_seed, 20));
    initialize_weights(model, rng);

    const std::string log_path = args.log_out.empty() ? args.checkpoint_out + ".log.csv" : args.log_out;
    std::vector<EpochLog> log;
    auto on_epoch = [&](const EpochLog& row, const ModelGraph& m) {
        if (row.saved) {
            save_checkpoint(args.checkpoint_out, m,
                            {static_cast<std::uint32_t>(row.epoch), row.val_ssd, cfg.train.seed});
        }
        log.push_back(row);
        write_text(log_path, training_log_csv(log));
        if (progress) progress(row);
    };
    return train_model(model, train, val, cfg.train, on_epoch);
}

// --- methods -----------------------------------------------------------------

MethodSpec parse_method_spec(std::string_view text) {
    MethodSpec m;
    const auto eq = text.find('=');
    m.name = std::string(text.substr(0, eq));
    if (eq != std::string_view::npos) m.checkpoint = std::string(text.substr(eq + 1));
    std::replace(m.name.begin(), m.name.end(), '_', '-');
    const bool known = m.name == "fir" || m.name == "iir" || m.name == "identity" || m.name == "oracle" ||
                       is_model_method(m.name);
    if (!known) {
        throw ConfigError("unknown method '" + m.name +
                          "' (deepfilter|vanilla-l|vanilla-nl|multibranch|fir|iir|identity|oracle)");
    }
    if (!m.checkpoint.empty() && !is_model_method(m.name)) {
        throw ConfigError("method '" + m.name + "' does not take a checkpoint");
    }
    return m;
}

bool is_model_method(std::string_view name) {
    return name == "deepfilter" || name == "vanilla-l" || name == "vanilla-nl" || name == "multibranch";
}

std::vector<std::vector<double>> run_method(const MethodSpec& method, const std::vector<const BeatPair*>& beats,
                                            const RunConfig& cfg) {
    if (method.name == "identity" || method.name == "oracle") {
        std::vector<std::vector<double>> out;
        out.reserve(beats.size());
        for (const auto* p : beats) out.push_back(method.name == "identity" ? p->noisy : p->clean.samples);
        return out;
    }
    if (method.name == "fir" || method.name == "iir") return stream_outputs(classical_design(method.name), beats);
    ThreadScope threads;
    apply_threading(cfg);
    return model_outputs(load_model(method), beats, cfg.float_inference);
}

MethodRecords score_method(const std::string& name, const std::vector<const BeatPair*>& beats,
                           const std::vector<std::vector<double>>& outputs, const RunConfig& cfg) {
    if (outputs.size() != beats.size()) throw ShapeError("method output count differs from beat count");
    MethodRecords m{name, {}};
    m.records.reserve(beats.size());
    for (std::size_t i = 0; i < beats.size(); ++i) {
        const auto& clean = beats[i]->clean;
        const std::size_t n = cfg.metric_window == MetricWindow::full ? kBeatLength : clean.original_length;
        m.records.push_back(compute_metrics(std::span(clean.samples).first(n), std::span(outputs[i]).first(n),
                                            cfg.prd_form, clean.id));
    }
    return m;
}

std::string per_beat_csv(const MethodRecords& records) {
    std::string out = "record,channel,beat_index,ssd,mad,prd,cos_sim\n";
    char line[256];
    auto opt = [](const std::optional<double>& v) {
        char b[40] = "";
        if (v) std::snprintf(b, sizeof b, "%.10g", *v);
        return std::string(b);
    };
    for (const auto& r : records.records) {
        std::snprintf(line, sizeof line, "%s,%u,%u,%.10g,%.10g,", r.beat.record.c_str(), r.beat.channel,
                      r.beat.beat_index, r.ssd, r.mad);
        out += line + opt(r.prd) + "," + opt(r.cos_sim) + "\n";
    }
    return out;
}

// --- evaluate / compare ---------------------------------------------------------

namespace {

ReportRun compare_impl(const RunConfig& cfg, const CompareArgs& args) {
    const Dataset data = load_dataset(args.dataset);
    const auto beats = test_beats(data);

    std::vector<MethodRecords> records;
    for (const auto& m : args.methods) {
        for (const auto& r : records) {
            if (r.method == m.name) throw ConfigError("method '" + m.name + "' listed twice");
        }
        records.push_back(score_method(m.name, beats, run_method(m, beats, cfg), cfg));
        if (!args.out_prefix.empty()) {
            write_text(args.out_prefix + "." + m.name + ".beats.csv", per_beat_csv(records.back()));
            if (m.name == "fir" || m.name == "iir") {
                write_coefficients(args.out_prefix + "." + m.name + ".coefficients.txt", classical_design(m.name));
            }
        }
    }

    std::string proposed = args.proposed;
    if (proposed.empty()) {
        const auto it = std::find_if(args.methods.begin(), args.methods.end(),
                                     [](const MethodSpec& m) { return is_model_method(m.name); });
        proposed = it != args.methods.end() ? it->name : args.methods.front().name;
    }
    const ComparisonSummary summary = aggregate_summary(records, proposed);

    ReportRun run;
    for (const auto& s : summary.rows) run.rows.push_back(summary_row(s, summary.beat_count));
    if (args.timing_beats > 0) {
        for (std::size_t i = 0; i < args.methods.size(); ++i) {
            run.rows[i].ms_per_beat = cmd_time(cfg, args.methods[i], args.timing_beats, args.dataset).median_ms;
        }
    }
    if (!args.reference_rows.empty()) {
        for (auto& r : parse_reference_rows(as_text(read_file(args.reference_rows)))) run.rows.push_back(std::move(r));
    }
    sort_rows(run.rows);

    run.echo = config_echo(cfg);
    run.echo.erase(std::remove_if(run.echo.begin(), run.echo.end(), [](const auto& kv) { return kv.first == "model"; }),
                   run.echo.end());
    std::string method_list;
    for (const auto& m : args.methods) {
        method_list += (method_list.empty() ? "" : " ") + m.name;
        if (!m.checkpoint.empty()) {
            run.echo.emplace_back("checkpoint_" + m.name, dataset_fingerprint(m.checkpoint));
        }
    }
    run.echo.emplace_back("methods", method_list);
    run.echo.emplace_back("proposed", proposed);
    run.echo.emplace_back("dataset", dataset_fingerprint(args.dataset));
    run.echo.emplace_back("dataset_seed", std::to_string(data.seed));
    run.echo.emplace_back("dataset_source", data.source == DataSource::synthetic ? "synthetic" : "physionet");
    run.echo.emplace_back("test_beats", std::to_string(beats.size()));
    run.echo.emplace_back("significance", "wilcoxon signed-rank, two-sided, p < 0.01");
    run.echo.emplace_back("classical_protocol", "zero-phase over each record/channel's concatenated test beats");
    run.echo.emplace_back("build", std::string(build_id()));
    std::string identity;
    for (const auto& [k, v] : run.echo) identity += k + "=" + v + "\n";
    run.run_id = "run-" + hex(fnv1a(identity));

    if (!args.out_prefix.empty()) {
        const ReportDocument doc{{run}};
        write_text(args.out_prefix + ".csv", format_summary_csv(doc));
        write_text(args.out_prefix + ".md", format_markdown(doc));
    }
    return run;
}

}  // namespace

ReportRun cmd_compare(const RunConfig& cfg, const CompareArgs& args) {
    if (args.methods.size() < 2) throw ConfigError("compare needs at least two methods");
    return compare_impl(cfg, args);
}

ReportRun cmd_evaluate(const RunConfig& cfg, const MethodSpec& method, const std::string& dataset,
                       const std::string& out_prefix) {
    CompareArgs args;
    args.methods = {method};
    args.dataset = dataset;
    args.out_prefix = out_prefix;
    return compare_impl(cfg, args);
}

// --- time / report ----------------------------------------------------------------

LatencyStats cmd_time(const RunConfig& cfg, const MethodSpec& method, std::size_t n_beats, const std::string& dataset) {
    if (n_beats == 0) throw ConfigError("time needs at least one beat");
    std::vector<std::vector<double>> inputs;
    if (!dataset.empty()) {
        const Dataset d = load_dataset(dataset);
        const auto beats = test_beats(d);
        for (std::size_t i = 0; i < n_beats; ++i) inputs.push_back(beats[i % beats.size()]->noisy);
    } else {
        Rng rng(derive_seed(cfg.prepare.seed, 30));
        for (std::size_t i = 0; i < n_beats; ++i) {
            auto beat = synth_ecg_beat(rng, {}).samples;
            const auto blw = synth_blw(rng, kBeatLength);
            for (std::size_t k = 0; k < kBeatLength; ++k) beat[k] += 0.5 * blw[k];
            inputs.push_back(std::move(beat));
        }
    }

    ThreadScope threads;
    kernels::set_thread_count(1);
    std::function<void(const std::vector<double>&)> run_one;
    ModelGraph model;
    std::optional<FilterDesign> design;
    if (is_model_method(method.name)) {
        if (method.checkpoint.empty()) {
            // Latency does not depend on the weight values.
            model = build_model(model_kind_of(method.name));
            Rng rng(derive_seed(cfg.init_seed, 20));
            initialize_weights(model, rng);
        } else {
            model = load_model(method);
        }
        run_one = [&](const std::vector<double>& x) {
            if (cfg.float_inference) {
                const TensorF t({1, 1, kBeatLength}, std::vector<float>(x.begin(), x.end()));
                (void)forward(model, t);
            } else {
                (void)forward(model, Tensor({1, 1, kBeatLength}, x));
            }
        };
    } else if (method.name == "fir" || method.name == "iir") {
        design = classical_design(method.name);
        run_one = [&](const std::vector<double>& x) { (void)zero_phase_filter(*design, x); };
    } else {
        run_one = [](const std::vector<double>& x) { (void)std::vector<double>(x); };
    }

    for (std::size_t w = 0; w < 2; ++w) run_one(inputs[w % inputs.size()]);
    std::vector<double> ms;
    ms.reserve(inputs.size());
    for (const auto& x : inputs) {
        const auto t0 = std::chrono::steady_clock::now();
        run_one(x);
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    LatencyStats s;
    s.beats = ms.size();
    const std::size_t mid = ms.size() / 2;
    s.median_ms = ms.size() % 2 ? ms[mid] : 0.5 * (ms[mid - 1] + ms[mid]);
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(ms.size())));
    s.p95_ms = ms[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

ReportDocument cmd_report(const std::vector<std::string>& inputs, const std::string& out_prefix) {
    if (inputs.empty()) throw ConfigError("report needs at least one summary CSV");
    std::vector<ReportDocument> docs;
    for (const auto& path : inputs) {
        try {
            docs.push_back(parse_summary_csv(as_text(read_file(path))));
        } catch (const FormatError& e) {
            throw FormatError(path + ": " + e.what());
        }
    }
    ReportDocument merged = merge_reports(docs);
    if (!out_prefix.empty()) {
        write_text(out_prefix + ".csv", format_summary_csv(merged));
        write_text(out_prefix + ".md", format_markdown(merged));
    }
    return merged;
}

}  // namespace blw
