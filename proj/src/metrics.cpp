#include "blw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blw/error.hpp"

namespace blw {

std::string_view to_string(PrdForm form) {
    return form == PrdForm::printed ? "printed" : "conventional";
}

PrdForm parse_prd_form(std::string_view name) {
    if (name == "printed") return PrdForm::printed;
    if (name == "conventional") return PrdForm::conventional;
    throw ConfigError("unknown PRD form '" + std::string(name) + "' (printed|conventional)");
}

namespace {

void check_pair(std::span<const double> s1, std::span<const double> s2) {
    if (s1.size() != s2.size()) {
        throw ShapeError("metric inputs differ in length: " + std::to_string(s1.size()) + " vs " +
                         std::to_string(s2.size()));
    }
    if (s1.empty()) throw ShapeError("metric inputs are empty");
}

}  // namespace

double mad(std::span<const double> s1, std::span<const double> s2) {
    check_pair(s1, s2);
    double m = 0.0;
    for (std::size_t n = 0; n < s1.size(); ++n) m = std::max(m, std::abs(s1[n] - s2[n]));
    return m;
}

double ssd(std::span<const double> s1, std::span<const double> s2) {
    check_pair(s1, s2);
    double sum = 0.0;
    for (std::size_t n = 0; n < s1.size(); ++n) {
        const double d = s2[n] - s1[n];
        sum += d * d;
    }
    return sum;
}

double prd(std::span<const double> s1, std::span<const double> s2, PrdForm form) {
    const double num = ssd(s1, s2);
    const double mean1 =
        std::accumulate(s1.begin(), s1.end(), 0.0) / static_cast<double>(s1.size());
    const std::span<const double> centered = form == PrdForm::printed ? s2 : s1;
    double den = 0.0;
    for (double v : centered) den += (v - mean1) * (v - mean1);
    if (!(den > 0.0)) throw UndefinedMetricError("PRD denominator is zero");
    return std::sqrt(num / den) * 100.0;
}

double cosine_similarity(std::span<const double> s1, std::span<const double> s2) {
    check_pair(s1, s2);
    double dot = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    for (std::size_t n = 0; n < s1.size(); ++n) {
        dot += s1[n] * s2[n];
        n1 += s1[n] * s1[n];
        n2 += s2[n] * s2[n];
    }
    if (!(n1 > 0.0) || !(n2 > 0.0)) throw UndefinedMetricError("cosine similarity of a zero vector");
    return std::clamp(dot / (std::sqrt(n1) * std::sqrt(n2)), -1.0, 1.0);
}

MetricsRecord compute_metrics(std::span<const double> s1, std::span<const double> s2, PrdForm form,
                              BeatId beat) {
    MetricsRecord r;
    r.beat = std::move(beat);
    r.ssd = ssd(s1, s2);
    r.mad = mad(s1, s2);
    try {
        r.prd = prd(s1, s2, form);
    } catch (const UndefinedMetricError&) {
        r.prd.reset();
    }
    try {
        r.cos_sim = cosine_similarity(s1, s2);
    } catch (const UndefinedMetricError&) {
        r.cos_sim.reset();
    }
    return r;
}

// --- Wilcoxon -------------------------------------------------------------

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method) {
    if (a.size() != b.size()) {
        throw ShapeError("wilcoxon inputs differ in length: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    std::vector<double> d;
    d.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        if (!std::isfinite(diff)) throw NumericError("wilcoxon input is not finite");
        if (diff != 0.0) d.push_back(diff);
    }
    const std::size_t n = d.size();
    if (n < kWilcoxonMinPairs) {
        throw InsufficientDataError("wilcoxon needs at least 5 non-zero differences, got " +
                                    std::to_string(n));
    }

    // Doubled average ranks are integers: a tie group spanning ranks
    // first..last gets first + last.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
    std::vector<std::size_t> rank2(n);
    double tie_term = 0.0;
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start;
        while (end + 1 < n && std::abs(d[order[end + 1]]) == std::abs(d[order[start]])) ++end;
        const std::size_t doubled = (start + 1) + (end + 1);
        for (std::size_t k = start; k <= end; ++k) rank2[order[k]] = doubled;
        const double t = static_cast<double>(end - start + 1);
        tie_term += t * t * t - t;
        start = end + 1;
    }

    std::size_t w_plus2 = 0;
    std::size_t total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += rank2[i];
        if (d[i] > 0.0) w_plus2 += rank2[i];
    }
    const std::size_t stat2 = std::min(w_plus2, total2 - w_plus2);

    WilcoxonResult result;
    result.n = n;
    result.statistic = static_cast<double>(stat2) / 2.0;
    const bool exact = method == WilcoxonMethod::exact ||
                       (method == WilcoxonMethod::automatic && n <= kWilcoxonExactLimit);
    result.exact = exact;
    if (exact) {
        // Null distribution of the doubled W+: each rank enters with
        // probability 1/2.
        std::vector<double> prob(total2 + 1, 0.0);
        prob[0] = 1.0;
        std::size_t reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = rank2[i];
            reach += r;
            for (std::size_t s = reach + 1; s-- > 0;) {
                const double without = prob[s];
                const double with = s >= r ? prob[s - r] : 0.0;
                prob[s] = 0.5 * (without + with);
            }
        }
        double tail = 0.0;
        for (std::size_t s = 0; s <= stat2; ++s) tail += prob[s];
        result.p_value = std::min(1.0, 2.0 * tail);
    } else {
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        if (!(var > 0.0)) {
            result.p_value = 1.0;
        } else {
            const double z = std::max(0.0, std::abs(result.statistic - mean) - 0.5) / std::sqrt(var);
            result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
        }
    }
    return result;
}

// --- Aggregation -------------------------------------------------------------

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::ssd: return "ssd";
        case Metric::mad: return "mad";
        case Metric::prd: return "prd";
        case Metric::cos_sim: return "cos_sim";
    }
    return "?";
}

std::optional<double> metric_value(const MetricsRecord& r, Metric m) {
    switch (m) {
        case Metric::ssd: return r.ssd;
        case Metric::mad: return r.mad;
        case Metric::prd: return r.prd;
        case Metric::cos_sim: return r.cos_sim;
    }
    return std::nullopt;
}

bool MethodSummary::significant(Metric m) const {
    const auto& p = p_values[static_cast<std::size_t>(m)];
    return p.has_value() && *p < kSignificanceLevel;
}

namespace {

MetricStat describe(const std::vector<MetricsRecord>& records, Metric m, double scale) {
    MetricStat s;
    double sum = 0.0;
    for (const auto& r : records) {
        if (auto v = metric_value(r, m)) {
            sum += *v * scale;
            s.count += 1;
        } else {
            s.undefined += 1;
        }
    }
    if (s.count == 0) return s;
    s.mean = sum / static_cast<double>(s.count);
    double sq = 0.0;
    for (const auto& r : records) {
        if (auto v = metric_value(r, m)) sq += (*v * scale - s.mean) * (*v * scale - s.mean);
    }
    s.std = std::sqrt(sq / static_cast<double>(s.count));
    return s;
}

}  // namespace

ComparisonSummary aggregate_summary(std::span<const MethodRecords> methods,
                                    std::string_view proposed) {
    if (methods.empty()) throw ConfigError("aggregate_summary needs at least one method");
    const MethodRecords* base = &methods.front();
    if (!proposed.empty()) {
        auto it = std::find_if(methods.begin(), methods.end(),
                               [&](const MethodRecords& m) { return m.method == proposed; });
        if (it == methods.end()) {
            throw ConfigError("proposed method '" + std::string(proposed) + "' is not in the list");
        }
        base = &*it;
    }
    for (const auto& m : methods) {
        bool same = m.records.size() == base->records.size();
        for (std::size_t i = 0; same && i < m.records.size(); ++i) {
            same = m.records[i].beat == base->records[i].beat;
        }
        if (!same) {
            throw ConsistencyError("method '" + m.method + "' was evaluated on a different beat set than '" +
                                   base->method + "'");
        }
    }

    ComparisonSummary summary;
    summary.proposed = base->method;
    summary.beat_count = base->records.size();
    for (const auto& m : methods) {
        MethodSummary row;
        row.method = m.method;
        for (Metric metric : kAllMetrics) {
            const double scale = metric == Metric::cos_sim ? 100.0 : 1.0;
            row.stats[static_cast<std::size_t>(metric)] = describe(m.records, metric, scale);
        }
        if (&m != base) {
            for (Metric metric : kAllMetrics) {
                std::vector<double> x;
                std::vector<double> y;
                for (std::size_t i = 0; i < m.records.size(); ++i) {
                    auto a = metric_value(base->records[i], metric);
                    auto b = metric_value(m.records[i], metric);
                    if (a && b) {
                        x.push_back(*a);
                        y.push_back(*b);
                    }
                }
                try {
                    row.p_values[static_cast<std::size_t>(metric)] = wilcoxon_signed_rank(x, y).p_value;
                } catch (const InsufficientDataError&) {
                    row.p_values[static_cast<std::size_t>(metric)].reset();
                }
            }
        }
        summary.rows.push_back(std::move(row));
    }
    return summary;
}

}  // namespace blw
