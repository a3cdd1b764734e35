// Command-line front end: prepare, train, evaluate, compare, time, report.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blw/commands.hpp"
#include "blw/error.hpp"

namespace {

/// Single line, so the message stays machine-readable.
std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

int fail(const std::string& kind, const std::string& message) {
    std::fprintf(stderr, "error: kind=%s message=%s\n", kind.c_str(), one_line(message).c_str());
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ECG baseline wander removal benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::string model;
    std::string dataset;
    std::string out;
    std::string checkpoint;
    std::uint64_t seed = 0;
    bool seed_given = false;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--seed", seed, "Seed for data, initialization and shuffling")
            ->each([&](const std::string&) { seed_given = true; });
    };

    auto* prepare = app.add_subcommand("prepare", "Build the prepared dataset file");
    blw::PrepareArgs prep_args;
    add_common(prepare);
    prepare->add_flag("--synthetic", prep_args.synthetic, "Use the built-in synthetic corpus");
    prepare->add_option("--qt-dir", prep_args.qt_dir, "QT database directory");
    prepare->add_option("--nstdb-dir", prep_args.nstdb_dir, "Noise stress test database directory");
    prepare->add_option("--out", prep_args.out, "Output dataset file")->required();

    auto* train = app.add_subcommand("train", "Train a model");
    add_common(train);
    std::size_t max_epochs = 0;
    std::string log_path;
    bool quiet = false;
    train->add_option("--model", model, "deepfilter|vanilla-l|vanilla-nl|multibranch");
    train->add_option("--dataset", dataset, "Prepared dataset file")->required();
    train->add_option("--out", out, "Checkpoint written at each validation improvement")->required();
    train->add_option("--log", log_path, "Training log CSV (default <out>.log.csv)");
    train->add_option("--max-epochs", max_epochs, "Override the epoch cap");
    train->add_flag("--quiet", quiet, "No per-epoch progress lines");

    auto* evaluate = app.add_subcommand("evaluate", "Score one method on the test split");
    add_common(evaluate);
    evaluate->add_option("--model", model, "deepfilter|vanilla-l|vanilla-nl|multibranch|fir|iir|identity|oracle")
        ->required();
    evaluate->add_option("--checkpoint", checkpoint, "Checkpoint for model methods");
    evaluate->add_option("--dataset", dataset, "Prepared dataset file")->required();
    evaluate->add_option("--out", out, "Output prefix")->required();

    auto* compare = app.add_subcommand("compare", "Score several methods and build the comparison table");
    add_common(compare);
    std::vector<std::string> methods;
    std::string proposed;
    std::string reference_rows = std::string(BLW_DATA_DIR) + "/reference_rows.csv";
    bool no_reference = false;
    std::size_t timing_beats = 0;
    compare->add_option("--method", methods, "name or model=checkpoint; repeat for each method")->required();
    compare->add_option("--proposed", proposed, "Method the p-values are computed against");
    compare->add_option("--dataset", dataset, "Prepared dataset file")->required();
    compare->add_option("--out", out, "Output prefix")->required();
    compare->add_option("--reference-rows", reference_rows, "Published baseline rows CSV");
    compare->add_flag("--no-reference-rows", no_reference, "Leave published baseline rows out");
    compare->add_option("--timing", timing_beats, "Beats timed per method for the ms/beat column");

    auto* time = app.add_subcommand("time", "Per-beat inference latency on one thread");
    add_common(time);
    std::size_t beats = 100;
    time->add_option("--model", model, "Method to time")->required();
    time->add_option("--checkpoint", checkpoint, "Checkpoint (untrained weights when omitted)");
    time->add_option("--dataset", dataset, "Take beats from this dataset's test split");
    time->add_option("--beats", beats, "Number of timed beats");

    auto* report = app.add_subcommand("report", "Merge summary CSVs into one report");
    std::vector<std::string> inputs;
    report->add_option("inputs", inputs, "Summary CSV files")->required();
    report->add_option("--out", out, "Output prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        blw::RunConfig cfg = config_path.empty() ? blw::RunConfig{} : blw::load_config(config_path);
        if (seed_given) blw::apply_config_value(cfg, "seed", std::to_string(seed));
        if (!model.empty()) cfg.model = model;

        if (prepare->parsed()) {
            const auto r = blw::cmd_prepare(cfg, prep_args);
            std::printf("%s\n", r.counts.c_str());
        } else if (train->parsed()) {
            if (max_epochs > 0) cfg.train.max_epochs = max_epochs;
            blw::TrainArgs args{dataset, out, log_path};
            const auto r = blw::cmd_train(cfg, args, [&](const blw::EpochLog& row) {
                if (quiet) return;
                std::printf("epoch %zu train_loss %.6g val_ssd %.6g lr %.3g%s\n", row.epoch, row.train_loss,
                            row.val_ssd, row.lr, row.saved ? " saved" : "");
                std::fflush(stdout);
            });
            std::printf("stop=%s epochs=%zu best_epoch=%zu best_val_ssd=%.6g\n", r.stop_reason.c_str(),
                        r.log.size(), r.best_epoch, r.best_val_ssd);
        } else if (evaluate->parsed()) {
            auto spec = blw::parse_method_spec(model);
            if (!checkpoint.empty()) spec.checkpoint = checkpoint;
            const auto run = blw::cmd_evaluate(cfg, spec, dataset, out);
            const auto& row = run.rows.front();
            std::printf("%s beats=%zu ssd=%.6g mad=%.6g prd=%.6g cos_sim=%.6g\n", row.method.c_str(), row.beats,
                        row.stats[0].mean, row.stats[1].mean, row.stats[2].mean, row.stats[3].mean);
        } else if (compare->parsed()) {
            blw::CompareArgs args;
            for (const auto& m : methods) args.methods.push_back(blw::parse_method_spec(m));
            args.proposed = proposed;
            args.dataset = dataset;
            args.out_prefix = out;
            args.reference_rows = no_reference ? std::string() : reference_rows;
            args.timing_beats = timing_beats;
            const auto run = blw::cmd_compare(cfg, args);
            std::printf("%s written to %s.md and %s.csv\n", run.run_id.c_str(), out.c_str(), out.c_str());
        } else if (time->parsed()) {
            auto spec = blw::parse_method_spec(model);
            if (!checkpoint.empty()) spec.checkpoint = checkpoint;
            const auto s = blw::cmd_time(cfg, spec, beats, dataset);
            std::printf("%s beats=%zu median_ms=%.4f p95_ms=%.4f\n", spec.name.c_str(), s.beats, s.median_ms,
                        s.p95_ms);
        } else if (report->parsed()) {
            const auto doc = blw::cmd_report(inputs, out);
            std::printf("runs=%zu written to %s.md and %s.csv\n", doc.runs.size(), out.c_str(), out.c_str());
        }
    } catch (const blw::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
