#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "blw/binio.hpp"
#include "blw/commands.hpp"
#include "blw/error.hpp"
#include "blw/metrics.hpp"
#include "doctest.h"

using namespace blw;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        const fs::path p = fs::temp_directory_path() / "blw-test-commands";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

RunConfig small_config() {
    RunConfig cfg;
    cfg.model = "vanilla-l";
    cfg.prepare.synth_records = 20;
    cfg.prepare.synth_beats_per_channel = 3;
    cfg.prepare.synth_noise_length = 360 * 60;
    cfg.train.max_epochs = 3;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Dataset and a trained checkpoint shared by the cases below.
struct Fixture {
    RunConfig cfg = small_config();
    std::string dataset = (scratch() / "small.dfds").string();
    std::string checkpoint = (scratch() / "vl.dfck").string();
    PrepareResult prepared;
    TrainResult trained;
    Fixture() {
        prepared = cmd_prepare(cfg, {true, {}, {}, dataset});
        trained = cmd_train(cfg, {dataset, checkpoint, {}});
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("prepare reports split counts and writes the dataset") {
    auto& f = fixture();
    const auto& d = f.prepared.dataset;
    CHECK(f.prepared.counts.starts_with("train=" + std::to_string(d.count(Split::train)) +
                                        " val=" + std::to_string(d.count(Split::val)) +
                                        " test=" + std::to_string(d.count(Split::test))));
    CHECK(encode_dataset(load_dataset(f.dataset)) == encode_dataset(d));
    CHECK_THROWS_AS(cmd_prepare(f.cfg, {false, {}, {}, (scratch() / "x.dfds").string()}), ConfigError);
}

TEST_CASE("train writes a checkpoint and a log") {
    auto& f = fixture();
    CHECK(fs::exists(f.checkpoint));
    const auto log = slurp(f.checkpoint + ".log.csv");
    CHECK(log == training_log_csv(f.trained.log));
    CHECK(f.trained.log.size() == 3);
}

TEST_CASE("identity and oracle rows") {
    auto& f = fixture();
    const auto beats = f.prepared.dataset.select(Split::test);
    const auto id = score_method("identity", beats, run_method({"identity", {}}, beats, f.cfg), f.cfg);
    for (std::size_t i = 0; i < beats.size(); ++i)
        CHECK(id.records[i].ssd == ssd(beats[i]->clean.samples, beats[i]->noisy));
    const auto oracle = score_method("oracle", beats, run_method({"oracle", {}}, beats, f.cfg), f.cfg);
    for (const auto& r : oracle.records) {
        CHECK(r.ssd == 0.0);
        CHECK(r.mad == 0.0);
        CHECK(*r.prd == 0.0);
        CHECK(*r.cos_sim == doctest::Approx(1.0));
    }
}

TEST_CASE("metric window restricts to the original beat length") {
    auto& f = fixture();
    RunConfig cfg = f.cfg;
    cfg.metric_window = MetricWindow::original;
    const auto beats = f.prepared.dataset.select(Split::test);
    const auto full = score_method("fir", beats, run_method({"fir", {}}, beats, f.cfg), f.cfg);
    const auto orig = score_method("fir", beats, run_method({"fir", {}}, beats, cfg), cfg);
    // Classical outputs are zero-padded, so the padded tail adds nothing.
    for (std::size_t i = 0; i < beats.size(); ++i) CHECK(orig.records[i].ssd == doctest::Approx(full.records[i].ssd));
}

TEST_CASE("evaluate is reproducible") {
    auto& f = fixture();
    const std::string a = (scratch() / "eval-a").string(), b = (scratch() / "eval-b").string();
    const auto ra = cmd_evaluate(f.cfg, {"vanilla-l", f.checkpoint}, f.dataset, a);
    const auto rb = cmd_evaluate(f.cfg, {"vanilla-l", f.checkpoint}, f.dataset, b);
    CHECK(slurp(a + ".vanilla-l.beats.csv") == slurp(b + ".vanilla-l.beats.csv"));
    CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
    CHECK(ra.run_id == rb.run_id);
}

TEST_CASE("compare") {
    auto& f = fixture();
    CompareArgs args;
    args.methods = {{"vanilla-l", f.checkpoint}, {"identity", {}}, {"oracle", {}}, {"fir", {}}};
    args.dataset = f.dataset;
    args.out_prefix = (scratch() / "cmp").string();
    args.reference_rows = BLW_DATA_DIR "/reference_rows.csv";
    const auto run = cmd_compare(f.cfg, args);

    std::vector<std::string> order;
    for (const auto& r : run.rows) order.push_back(r.method);
    CHECK(order == std::vector<std::string>{"fir", "drnn", "fcn-dae", "vanilla-l", "identity", "oracle"});
    const auto* model = &run.rows[3];
    const auto* identity = &run.rows[4];
    CHECK(identity->stats[0].mean >= model->stats[0].mean);
    CHECK_FALSE(model->p_values[0].has_value());
    CHECK(identity->p_values[0].has_value());

    const auto doc = parse_summary_csv(slurp(args.out_prefix + ".csv"));
    REQUIRE(doc.runs.size() == 1);
    CHECK(doc.runs[0].run_id == run.run_id);
    const auto md = slurp(args.out_prefix + ".md");
    CHECK(md.find("DRNN (reference; not reproduced) | 5.85 ± 8.93") != std::string::npos);
    for (const char* m : {"vanilla-l", "identity", "oracle", "fir"})
        CHECK(fs::exists(args.out_prefix + "." + m + ".beats.csv"));
    const auto coeffs = slurp(args.out_prefix + ".fir.coefficients.txt");
    CHECK(coeffs.starts_with("# filter fir-highpass-kaiser\n# num_taps 8079\n"));
    CHECK_FALSE(fs::exists(args.out_prefix + ".identity.coefficients.txt"));

    const auto merged = cmd_report({args.out_prefix + ".csv", args.out_prefix + ".csv"},
                                   (scratch() / "merged").string());
    CHECK(merged.runs.size() == 1);

    args.methods = {{"identity", {}}};
    CHECK_THROWS_AS(cmd_compare(f.cfg, args), ConfigError);
    args.methods = {{"identity", {}}, {"identity", {}}};
    CHECK_THROWS_AS(cmd_compare(f.cfg, args), ConfigError);
}

TEST_CASE("checkpoint kind must match the method") {
    auto& f = fixture();
    const auto beats = f.prepared.dataset.select(Split::test);
    CHECK_THROWS_AS(run_method({"deepfilter", f.checkpoint}, beats, f.cfg), CompatibilityError);
}

TEST_CASE("methods scored on different beats cannot be aggregated") {
    auto& f = fixture();
    const auto beats = f.prepared.dataset.select(Split::test);
    auto a = score_method("identity", beats, run_method({"identity", {}}, beats, f.cfg), f.cfg);
    auto b = a;
    b.method = "oracle";
    b.records.back().beat.beat_index += 1000;
    CHECK_THROWS_AS(aggregate_summary(std::vector<MethodRecords>{a, b}), ConsistencyError);
}

TEST_CASE("method specs") {
    const auto m = parse_method_spec("vanilla_nl=x.dfck");
    CHECK(m.name == "vanilla-nl");
    CHECK(m.checkpoint == "x.dfck");
    CHECK_THROWS_AS(parse_method_spec("lstm"), ConfigError);
    CHECK_THROWS_AS(parse_method_spec("fir=x"), ConfigError);
}

TEST_CASE("latency measurement") {
    const auto stats = cmd_time(small_config(), {"vanilla-l", {}}, 5);
    CHECK(stats.beats == 5);
    CHECK(stats.median_ms > 0.0);
    CHECK(stats.p95_ms >= stats.median_ms);
}
