#include <string>

#include "blw/error.hpp"
#include "blw/report.hpp"
#include "doctest.h"

using namespace blw;

namespace {

ReportRow row(std::string method, double ssd_mean, std::optional<double> p = std::nullopt) {
    ReportRow r;
    r.method = method;
    r.label = method_label(method);
    r.beats = 3;
    for (auto& s : r.stats) s = {ssd_mean, 0.5, 3, 0};
    r.p_values[0] = p;
    return r;
}

ReportRun run(std::string id, std::vector<ReportRow> rows) {
    return {std::move(id), {{"prd_form", "printed"}, {"proposed", "deepfilter"}}, std::move(rows)};
}

}  // namespace

TEST_CASE("reference rows render as published") {
    const auto rows = parse_reference_rows(
        "# blwbench-reference v1\n"
        "method,label,ssd_mean,ssd_std,mad_mean,mad_std,prd_mean,prd_std,cos_mean,cos_std\n"
        "drnn,DRNN,5.85,8.93,0.44,0.30,49.91,26.92,89.48,10.28\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].reference_only);
    CHECK(rows[0].label == "DRNN (reference; not reproduced)");
    const auto md = format_markdown({{run("r1", rows)}});
    CHECK(md.find("| DRNN (reference; not reproduced) | 5.85 ± 8.93 | 0.44 ± 0.30 | 49.91 ± 26.92 | 89.48 ± 10.28 |") !=
          std::string::npos);
    CHECK_THROWS_AS(parse_reference_rows("# blwbench-reference v2\n"), FormatError);
    CHECK_THROWS_AS(parse_reference_rows("# blwbench-reference v1\nh\ndrnn,DRNN,1\n"), FormatError);
}

TEST_CASE("table cells keep the SSD, MAD, PRD, CosSim order") {
    ReportRow r;
    r.method = "deepfilter";
    r.label = method_label(r.method);
    r.stats = {MetricStat{4.29, 6.35, 1, 0}, MetricStat{0.34, 0.25, 1, 0}, MetricStat{45.35, 29.69, 1, 0},
               MetricStat{91.46, 8.61, 1, 0}};
    const auto md = format_markdown({{run("r", {r})}});
    CHECK(md.find("| 4.29 ± 6.35 | 0.34 ± 0.25 | 45.35 ± 29.69 | 91.46 ± 8.61 |") != std::string::npos);
}

TEST_CASE("missing p-values render as a dash and significance as a star") {
    const auto md = format_markdown({{run("r", {row("deepfilter", 1.0), row("fir", 2.0, 0.001), row("iir", 3.0, 0.2)})}});
    CHECK(md.find("| DeepFilter (Multibranch LANLD) | — |") != std::string::npos);
    CHECK(md.find("2.00 ± 0.50 *") != std::string::npos);
    CHECK(md.find("3.00 ± 0.50 *") == std::string::npos);
    CHECK(md.find("- prd_form: printed") != std::string::npos);
}

TEST_CASE("summary csv round trip and schema") {
    ReportDocument doc{{run("0000000000000001", {row("fir", 2.0, 0.004), row("deepfilter", 1.0)})}};
    doc.runs[0].rows[0].ms_per_beat = 1.25;
    const auto text = format_summary_csv(doc);
    CHECK(text.starts_with("# blwbench-summary v1\n# run 0000000000000001\n# prd_form=printed\n"));
    CHECK(text.find("method,label,source,beats,ssd_mean,ssd_std,ssd_p,ssd_n,mad_mean") != std::string::npos);
    CHECK(format_summary_csv(parse_summary_csv(text)) == text);

    CHECK_THROWS_AS(parse_summary_csv("# blwbench-summary v2\n"), FormatError);
    CHECK_THROWS_AS(parse_summary_csv(""), FormatError);
    CHECK_THROWS_AS(parse_summary_csv("# blwbench-summary v1\nfir,x\n"), FormatError);
    CHECK_THROWS_AS(parse_summary_csv("# blwbench-summary v1\n# run a\nfir,x,computed,1\n"), FormatError);
}

TEST_CASE("row order") {
    std::vector<ReportRow> rows{row("oracle", 0), row("deepfilter", 0), row("zzz", 0), row("fir", 0),
                                row("drnn", 0),   row("vanilla-l", 0), row("iir", 0)};
    sort_rows(rows);
    std::vector<std::string> order;
    for (const auto& r : rows) order.push_back(r.method);
    CHECK(order == std::vector<std::string>{"fir", "iir", "drnn", "vanilla-l", "deepfilter", "oracle", "zzz"});
}

TEST_CASE("merging reports") {
    const ReportDocument a{{run("b", {row("fir", 1)}), run("a", {row("iir", 1)})}};
    const ReportDocument b{{run("c", {row("fir", 2)}), run("a", {row("iir", 1)})}};
    const auto ab = merge_reports({a, b});
    REQUIRE(ab.runs.size() == 3);
    CHECK(ab.runs[0].run_id == "a");
    CHECK(ab.runs[2].run_id == "c");
    // Order of inputs and repetition do not matter.
    CHECK(format_summary_csv(merge_reports({b, a})) == format_summary_csv(ab));
    CHECK(format_summary_csv(merge_reports({ab, ab})) == format_summary_csv(ab));

    const ReportDocument clash{{run("a", {row("iir", 9)})}};
    CHECK_THROWS_AS(merge_reports({a, clash}), ConsistencyError);
}

TEST_CASE("fnv1a") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}
