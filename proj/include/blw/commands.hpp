#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blw/config.hpp"
#include "blw/dataset.hpp"
#include "blw/report.hpp"
#include "blw/trainer.hpp"

namespace blw {

/// Build identifier baked in at configure time ("unknown" outside git).
std::string_view build_id();

// --- prepare -----------------------------------------------------------------

struct PrepareArgs {
    bool synthetic = false;
    std::string qt_dir;
    std::string nstdb_dir;
    std::string out;
};

struct PrepareResult {
    Dataset dataset;
    /// "train=N val=N test=N degenerate=N".
    std::string counts;
};

PrepareResult cmd_prepare(const RunConfig& cfg, const PrepareArgs& args);

// --- train -------------------------------------------------------------------

struct TrainArgs {
    std::string dataset;
    std::string checkpoint_out;
    /// Defaults to checkpoint_out + ".log.csv".
    std::string log_out;
};

/// Writes the checkpoint whenever validation SSD improves and the CSV log
/// after every epoch.
TrainResult cmd_train(const RunConfig& cfg, const TrainArgs& args,
                      const std::function<void(const EpochLog&)>& progress = {});

// --- methods -----------------------------------------------------------------

/// "fir", "iir", "identity", "oracle", or a model kind with a checkpoint
/// ("deepfilter=path"; the path may also be given separately).
struct MethodSpec {
    std::string name;
    std::string checkpoint;
};

MethodSpec parse_method_spec(std::string_view text);
bool is_model_method(std::string_view name);

/// Filtered 512-sample output per beat, in input order. Classical filters run
/// over each record/channel's concatenated noisy beats (original lengths, in
/// beat order) and the result is cut back into beats.
std::vector<std::vector<double>> run_method(const MethodSpec& method, const std::vector<const BeatPair*>& beats,
                                            const RunConfig& cfg);

MethodRecords score_method(const std::string& name, const std::vector<const BeatPair*>& beats,
                           const std::vector<std::vector<double>>& outputs, const RunConfig& cfg);

// --- evaluate / compare ---------------------------------------------------------

struct CompareArgs {
    std::vector<MethodSpec> methods;
    /// Row the p-values are computed against; first model method if empty.
    std::string proposed;
    std::string dataset;
    /// Writes <prefix>.csv (summary), <prefix>.md, <prefix>.<method>.beats.csv
    /// and, for classical filters, <prefix>.<method>.coefficients.txt.
    std::string out_prefix;
    /// Published baseline rows to include; empty for none.
    std::string reference_rows;
    /// Beats timed per method for the ms/beat column; 0 leaves it empty so
    /// outputs stay byte-reproducible.
    std::size_t timing_beats = 0;
};

ReportRun cmd_compare(const RunConfig& cfg, const CompareArgs& args);

/// Single method: per-beat CSV plus a one-row summary.
ReportRun cmd_evaluate(const RunConfig& cfg, const MethodSpec& method, const std::string& dataset,
                       const std::string& out_prefix);

std::string per_beat_csv(const MethodRecords& records);

// --- time / report ----------------------------------------------------------------

struct LatencyStats {
    double median_ms = 0.0;
    double p95_ms = 0.0;
    std::size_t beats = 0;
};

/// Wall-clock per 512-sample beat on one thread, after two warm-up runs.
/// Beats come from the dataset's test split when given, else a synthetic
/// record.
LatencyStats cmd_time(const RunConfig& cfg, const MethodSpec& method, std::size_t n_beats,
                      const std::string& dataset = {});

/// Merges summary CSVs into <prefix>.csv and <prefix>.md.
ReportDocument cmd_report(const std::vector<std::string>& inputs, const std::string& out_prefix);

}  // namespace blw
