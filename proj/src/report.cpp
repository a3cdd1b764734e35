#include "blw/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>

#include "blw/error.hpp"

namespace blw {

namespace {

constexpr std::array<std::string_view, 4> kMetricKeys{"ssd", "mad", "prd", "cos"};

int method_rank(std::string_view m) {
    static constexpr std::array<std::string_view, 10> order{
        "fir", "iir", "drnn", "fcn-dae", "vanilla-l", "vanilla-nl", "multibranch", "deepfilter", "identity", "oracle"};
    const auto it = std::find(order.begin(), order.end(), m);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        const auto p = line.find(sep);
        out.push_back(line.substr(0, p));
        if (p == std::string_view::npos) break;
        line = line.substr(p + 1);
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        if (nl == std::string_view::npos) break;
        text = text.substr(nl + 1);
    }
    return out;
}

double to_double(std::string_view s, std::size_t line_no) {
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

std::optional<double> to_opt(std::string_view s, std::size_t line_no) {
    if (s.empty()) return std::nullopt;
    return to_double(s, line_no);
}

std::size_t to_size(std::string_view s, std::size_t line_no) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": bad count '" + std::string(s) + "'");
    }
    return v;
}

std::string csv_header() {
    std::string h = "method,label,source,beats";
    for (auto k : kMetricKeys) {
        for (auto f : {"_mean", "_std", "_p", "_n"}) h += "," + std::string(k) + f;
    }
    return h + ",ms_per_beat";
}

constexpr std::size_t kColumns = 4 + 4 * 4 + 1;

bool same_row(const ReportRow& a, const ReportRow& b) {
    if (a.method != b.method || a.label != b.label || a.reference_only != b.reference_only || a.beats != b.beats ||
        a.ms_per_beat != b.ms_per_beat || a.p_values != b.p_values) {
        return false;
    }
    for (std::size_t m = 0; m < 4; ++m) {
        const auto& x = a.stats[m];
        const auto& y = b.stats[m];
        if (x.mean != y.mean || x.std != y.std || x.count != y.count) return false;
    }
    return true;
}

bool same_run(const ReportRun& a, const ReportRun& b) {
    if (a.echo != b.echo || a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (!same_row(a.rows[i], b.rows[i])) return false;
    }
    return true;
}

std::string cell(const MetricStat& s, bool star) {
    if (s.count == 0) return "—";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f%s", s.mean, s.std, star ? " *" : "");
    return buf;
}

std::string p_cell(const std::optional<double>& p) {
    if (!p) return "—";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", *p);
    return buf;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string method_label(std::string_view method) {
    static const std::map<std::string_view, std::string_view> labels{
        {"fir", "FIR Filter"},         {"iir", "IIR Filter"},
        {"drnn", "DRNN"},              {"fcn-dae", "FCN-DAE"},
        {"vanilla-l", "Vanilla L"},    {"vanilla-nl", "Vanilla NL"},
        {"multibranch", "Multibranch LANL"}, {"deepfilter", "DeepFilter (Multibranch LANLD)"},
        {"identity", "Identity (noisy input)"}, {"oracle", "Oracle (clean signal)"}};
    const auto it = labels.find(method);
    return it == labels.end() ? std::string(method) : std::string(it->second);
}

void sort_rows(std::vector<ReportRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        const int ra = method_rank(a.method);
        const int rb = method_rank(b.method);
        if (ra != rb) return ra < rb;
        return a.method < b.method;
    });
}

ReportRow summary_row(const MethodSummary& s, std::size_t beats) {
    ReportRow r;
    r.method = s.method;
    r.label = method_label(s.method);
    r.reference_only = s.reference_only;
    r.beats = beats;
    r.stats = s.stats;
    r.p_values = s.p_values;
    return r;
}

std::vector<ReportRow> parse_reference_rows(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kReferenceSchema) {
        throw FormatError("reference rows: expected schema line '" + std::string(kReferenceSchema) + "'");
    }
    std::vector<ReportRow> rows;
    bool header_seen = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 10) throw FormatError("reference rows line " + std::to_string(i + 1) + ": expected 10 fields");
        ReportRow r;
        r.method = std::string(f[0]);
        r.label = std::string(f[1]) + " (reference; not reproduced)";
        r.reference_only = true;
        for (std::size_t m = 0; m < 4; ++m) {
            r.stats[m].mean = to_double(f[2 + 2 * m], i + 1);
            r.stats[m].std = to_double(f[3 + 2 * m], i + 1);
            r.stats[m].count = 1;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string format_summary_csv(const ReportDocument& doc) {
    std::string out(kSummarySchema);
    out += '\n';
    for (std::size_t k = 0; k < doc.runs.size(); ++k) {
        const ReportRun& run = doc.runs[k];
        if (k > 0) out += '\n';
        out += "# run " + run.run_id + '\n';
        for (const auto& [key, value] : run.echo) out += "# " + key + "=" + value + '\n';
        out += csv_header() + '\n';
        for (const auto& r : run.rows) {
            out += r.method + "," + r.label + "," + (r.reference_only ? "reference" : "computed") + "," +
                   std::to_string(r.beats);
            for (std::size_t m = 0; m < 4; ++m) {
                const auto& s = r.stats[m];
                out += "," + num(s.mean) + "," + num(s.std) + "," + opt_num(r.p_values[m]) + "," +
                       std::to_string(s.count);
            }
            out += "," + opt_num(r.ms_per_beat) + '\n';
        }
    }
    return out;
}

ReportDocument parse_summary_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kSummarySchema) {
        throw FormatError("summary: expected schema line '" + std::string(kSummarySchema) + "'");
    }
    ReportDocument doc;
    ReportRun* run = nullptr;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto line = lines[i];
        const std::size_t line_no = i + 1;
        if (line.empty()) continue;
        if (line.starts_with("# run ")) {
            doc.runs.push_back({std::string(line.substr(6)), {}, {}});
            run = &doc.runs.back();
            continue;
        }
        if (!run) throw FormatError("line " + std::to_string(line_no) + ": content before '# run'");
        if (line.starts_with("# ")) {
            const auto body = line.substr(2);
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) throw FormatError("line " + std::to_string(line_no) + ": bad echo line");
            run->echo.emplace_back(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
            continue;
        }
        if (line == csv_header()) continue;
        const auto f = split(line, ',');
        if (f.size() != kColumns) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(kColumns) +
                              " fields, got " + std::to_string(f.size()));
        }
        ReportRow r;
        r.method = std::string(f[0]);
        r.label = std::string(f[1]);
        if (f[2] != "reference" && f[2] != "computed") {
            throw FormatError("line " + std::to_string(line_no) + ": bad source '" + std::string(f[2]) + "'");
        }
        r.reference_only = f[2] == "reference";
        r.beats = to_size(f[3], line_no);
        for (std::size_t m = 0; m < 4; ++m) {
            r.stats[m].mean = to_double(f[4 + 4 * m], line_no);
            r.stats[m].std = to_double(f[5 + 4 * m], line_no);
            r.p_values[m] = to_opt(f[6 + 4 * m], line_no);
            r.stats[m].count = to_size(f[7 + 4 * m], line_no);
        }
        r.ms_per_beat = to_opt(f[20], line_no);
        run->rows.push_back(std::move(r));
    }
    return doc;
}

std::string format_markdown(const ReportDocument& doc) {
    std::string out = "# Baseline wander removal benchmark\n";
    for (const ReportRun& run : doc.runs) {
        std::string proposed;
        for (const auto& [k, v] : run.echo) {
            if (k == "proposed") proposed = v;
        }
        out += "\n## Run " + run.run_id + "\n\n";
        out += "| Method | SSD (au) | MAD (au) | PRD (%) | Cosine Sim ×100 (%) | ms/beat |\n";
        out += "|---|---|---|---|---|---|\n";
        for (const auto& r : run.rows) {
            out += "| " + r.label;
            for (std::size_t m = 0; m < 4; ++m) {
                const bool star = r.p_values[m] && *r.p_values[m] < kSignificanceLevel;
                out += " | " + cell(r.stats[m], star);
            }
            char t[32] = "—";
            if (r.ms_per_beat) std::snprintf(t, sizeof t, "%.2f", *r.ms_per_beat);
            out += " | " + std::string(t) + " |\n";
        }
        out += "\nWilcoxon signed-rank p-values against " + method_label(proposed) +
               " (* in the table above marks p < 0.01):\n\n";
        out += "| Method | SSD | MAD | PRD | Cosine Sim |\n|---|---|---|---|---|\n";
        for (const auto& r : run.rows) {
            if (r.reference_only) continue;
            out += "| " + r.label;
            for (std::size_t m = 0; m < 4; ++m) out += " | " + p_cell(r.p_values[m]);
            out += " |\n";
        }
        out += "\nConfiguration:\n\n";
        for (const auto& [k, v] : run.echo) out += "- " + k + ": " + v + "\n";
    }
    return out;
}

ReportDocument merge_reports(const std::vector<ReportDocument>& inputs) {
    std::map<std::string, ReportRun> by_id;
    for (const auto& doc : inputs) {
        for (const auto& run : doc.runs) {
            auto [it, inserted] = by_id.emplace(run.run_id, run);
            if (!inserted && !same_run(it->second, run)) {
                throw ConsistencyError("run " + run.run_id + " appears twice with different content");
            }
        }
    }
    ReportDocument out;
    for (auto& [id, run] : by_id) {
        sort_rows(run.rows);
        out.runs.push_back(std::move(run));
    }
    return out;
}

}  // namespace blw
