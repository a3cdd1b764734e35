#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blw/common.hpp"

namespace blw {

/// PRD denominator: `printed` centers the filtered signal s2 on the mean of
/// the clean signal s1; `conventional` centers s1 on its own mean.
enum class PrdForm { printed, conventional };

std::string_view to_string(PrdForm form);
PrdForm parse_prd_form(std::string_view name);

/// s1 is the clean reference, s2 the filtered signal. All throw ShapeError on
/// length mismatch or empty input.
double mad(std::span<const double> s1, std::span<const double> s2);
double ssd(std::span<const double> s1, std::span<const double> s2);
/// Percent. Throws UndefinedMetricError when the denominator is zero.
double prd(std::span<const double> s1, std::span<const double> s2, PrdForm form = PrdForm::printed);
/// Throws UndefinedMetricError when either vector has zero norm.
double cosine_similarity(std::span<const double> s1, std::span<const double> s2);

struct MetricsRecord {
    BeatId beat;
    double ssd = 0.0;
    double mad = 0.0;
    /// nullopt when undefined for this beat; such beats are excluded from
    /// that metric's aggregate and counted.
    std::optional<double> prd;
    std::optional<double> cos_sim;
};

MetricsRecord compute_metrics(std::span<const double> s1, std::span<const double> s2,
                              PrdForm form = PrdForm::printed, BeatId beat = {});

// --- Wilcoxon signed-rank -------------------------------------------------

enum class WilcoxonMethod { automatic, exact, normal };

struct WilcoxonResult {
    /// min(W+, W-) over the non-zero differences.
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    bool exact = false;
};

/// Largest n evaluated with the exact null distribution in automatic mode.
inline constexpr std::size_t kWilcoxonExactLimit = 25;
inline constexpr std::size_t kWilcoxonMinPairs = 5;
inline constexpr double kSignificanceLevel = 0.01;

/// Two-sided paired test on a - b. Zero differences are dropped, tied |d|
/// get average ranks. Exact distribution (ties included) for n <= 25 unless
/// overridden; above that, normal approximation with tie and continuity
/// corrections. Throws InsufficientDataError with fewer than 5 non-zero
/// pairs.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method = WilcoxonMethod::automatic);

// --- Aggregation -----------------------------------------------------------

enum class Metric { ssd = 0, mad = 1, prd = 2, cos_sim = 3 };
inline constexpr std::array<Metric, 4> kAllMetrics{Metric::ssd, Metric::mad, Metric::prd,
                                                   Metric::cos_sim};

std::string_view to_string(Metric m);
std::optional<double> metric_value(const MetricsRecord& r, Metric m);

struct MethodRecords {
    std::string method;
    std::vector<MetricsRecord> records;
};

struct MetricStat {
    double mean = 0.0;
    /// Population standard deviation.
    double std = 0.0;
    std::size_t count = 0;
    std::size_t undefined = 0;
};

struct MethodSummary {
    std::string method;
    /// Cosine similarity stats are scaled by 100.
    std::array<MetricStat, 4> stats{};
    /// Wilcoxon p-value against the proposed method per metric; nullopt for
    /// the proposed row itself and for degenerate comparisons.
    std::array<std::optional<double>, 4> p_values{};
    /// Rows carried as published constants rather than computed here.
    bool reference_only = false;

    const MetricStat& stat(Metric m) const { return stats[static_cast<std::size_t>(m)]; }
    bool significant(Metric m) const;
};

struct ComparisonSummary {
    std::string proposed;
    std::size_t beat_count = 0;
    std::vector<MethodSummary> rows;
};

/// Mean / population std per metric for every method and Wilcoxon p-values
/// against `proposed` (the first method if empty). Every method must carry
/// the identical ordered beat list; otherwise ConsistencyError.
ComparisonSummary aggregate_summary(std::span<const MethodRecords> methods,
                                    std::string_view proposed = {});

}  // namespace blw
