#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "folio/config.hpp"
#include "folio/errors.hpp"
#include "folio/experiment.hpp"
#include "folio/report.hpp"
#include "folio/synthetic.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace folio {
namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("folio_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kMinimalConfig =
    "manifest = data/manifest.txt\n"
    "train_start = 2015-01-01\n"
    "train_end = 2015-05-31\n"
    "test_start = 2015-06-01\n"
    "test_end = 2015-07-19\n";

ExperimentConfig parse_text(const std::string& text, const fs::path& base = "/base") {
    std::istringstream in(text);
    return parse_config(in, base);
}

ErrorCode parse_error(const std::string& text) {
    try {
        parse_text(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "accepted:\n" << text;
    return ErrorCode::IoError;
}

// 3 synthetic assets on a daily calendar from 2015-01-01 plus a small, fast config.
ExperimentConfig campaign_config(const fs::path& dir, std::size_t runs, std::size_t steps, std::size_t online) {
    SyntheticMarketSpec spec;
    spec.tickers = {"S1", "S2", "S3"};
    spec.length = 200;
    spec.seed = 5;
    write_synthetic_dataset(dir / "data", spec);
    std::ostringstream text;
    text << kMinimalConfig << "time_window = 10\nbatch_size = 20\nlearning_rate = 1e-3\nsample_bias = 0.05\n"
         << "steps = " << steps << "\nonline_steps = " << online << "\nruns = " << runs
         << "\nvalidation_points = 2\nlog_every = 5\nbase_seed = 3\n";
    return parse_text(text.str(), dir);
}

TEST(Config, DefaultsFillAbsentKeys) {
    const auto c = parse_text(kMinimalConfig);
    EXPECT_EQ(c.manifest, fs::path("/base/data/manifest.txt"));
    EXPECT_EQ(c.trainer.learning_rate, 5e-5);
    EXPECT_EQ(c.trainer.batch_size, 200u);
    EXPECT_EQ(c.trainer.sample_bias, 0.002);
    EXPECT_EQ(c.trainer.steps, 300000u);
    EXPECT_EQ(c.trainer.online_steps, 30u);
    EXPECT_EQ(c.time_window, 50u);
    EXPECT_EQ(c.commission_rate, 0.0025);
    EXPECT_EQ(c.initial_value, 100000.0);
    EXPECT_EQ(c.runs, 50u);
    EXPECT_EQ(c.methods.size(), 3u);
    EXPECT_EQ(c.trainer.mu_gradient, MuGradient::implicit);
    EXPECT_EQ(c.seed_for_run(4), 4u);
}

TEST(Config, ParsesEveryKey) {
    const auto c = parse_text(std::string(kMinimalConfig) +
                              "# comment\n"
                              "alignment = forward_fill\n"
                              "normalization = data_max, last_close\n"
                              "learning_rate = 1e-4\nbatch_size = 16\nsample_bias = 0.1\nsteps = 7\n"
                              "online_steps = 0\nweight_decay = 0\nadam_beta1 = 0.8\nadam_beta2 = 0.99\n"
                              "adam_epsilon = 1e-6\nmu_gradient = constant\nlog_every = 3\ntime_window = 12\n"
                              "commission_rate = 0.001\ninitial_value = 1\nruns = 4\nbase_seed = 100\n"
                              "validation_points = 0\nkernel_width = 2\nconv1_channels = 3\nconv2_channels = 5\n");
    EXPECT_EQ(c.alignment, AlignmentPolicy::forward_fill);
    ASSERT_EQ(c.methods.size(), 2u);
    EXPECT_EQ(c.methods[0], NormalizationKind::data_max);
    EXPECT_EQ(c.trainer.batch_size, 16u);
    EXPECT_EQ(c.trainer.mu_gradient, MuGradient::constant);
    EXPECT_EQ(c.trainer.beta1, 0.8);
    EXPECT_EQ(c.seed_for_run(2), 102u);
    const auto pc = c.policy_config(6);
    EXPECT_EQ(pc.n_assets, 6u);
    EXPECT_EQ(pc.window, 12u);
    EXPECT_EQ(pc.kernel_width, 2u);
    EXPECT_EQ(pc.conv1_channels, 3u);
    EXPECT_EQ(pc.conv2_channels, 5u);
}

TEST(Config, RenderRoundTrips) {
    auto c = parse_text(std::string(kMinimalConfig) + "learning_rate = 0.1\ncommission_rate = 0.0025\n");
    const std::string text = render_config(c);
    EXPECT_EQ(render_config(parse_text(text)), text);
    EXPECT_EQ(parse_text(text).trainer.learning_rate, 0.1);
}

TEST(Config, RejectsBadInput) {
    const std::string base = kMinimalConfig;
    EXPECT_EQ(parse_error(base + "colour = red\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "batch_size = ten\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "batch_size = 0\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "sample_bias = 0\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "learning_rate = -1\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "time_window = 3\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "commission_rate = 1\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "normalization = zscore\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "mu_gradient = sometimes\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "runs = 0\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error("train_start = 2015-01-01\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "test_start = 2015-05-01\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(parse_error(base + "no equals sign\n"), ErrorCode::InvalidConfig);
    EXPECT_NO_THROW(parse_text(base + "steps = 0\nonline_steps = 0\n"));
}

TEST(Config, MissingFileIsAnIoError) {
    try {
        load_config("/nonexistent/folio.cfg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

TEST(Aggregate, Examples) {
    const auto a = aggregate(std::vector<double>{1.0, 1.2});
    EXPECT_NEAR(a.mean, 1.1, 1e-15);
    // sample std = 0.1 * sqrt(2), so 1.96 * 0.1 * sqrt(2) / sqrt(2)
    EXPECT_NEAR(a.half_width, 0.196, 1e-12);
    EXPECT_EQ(a.n, 2u);
    EXPECT_FALSE(a.single_sample);

    const auto same = aggregate(std::vector<double>{0.7, 0.7, 0.7});
    EXPECT_EQ(same.half_width, 0.0);

    const auto one = aggregate(std::vector<double>{3.0});
    EXPECT_EQ(one.mean, 3.0);
    EXPECT_EQ(one.half_width, 0.0);
    EXPECT_TRUE(one.single_sample);

    EXPECT_THROW(aggregate(std::vector<double>{}), Error);
}

RunResult fake_run(NormalizationKind m, std::uint64_t seed, double fapv_value, bool ok = true) {
    RunResult r;
    r.method = m;
    r.seed = seed;
    r.ok = ok;
    if (!ok) r.error = "boom";
    r.metrics = {fapv_value, 0.1 * static_cast<double>(seed), 0.5 + fapv_value, fapv_value - 1.0, 10};
    r.trajectory_file = trajectory_file_name(m, seed);
    r.wall_seconds = 1.0 + static_cast<double>(seed);
    return r;
}

TEST(AssembleReport, GroupsSortsAndAggregates) {
    std::vector<RunResult> runs{fake_run(NormalizationKind::data_max, 2, 0.9),
                                fake_run(NormalizationKind::last_close, 1, 1.5),
                                fake_run(NormalizationKind::data_max, 0, 1.1),
                                fake_run(NormalizationKind::data_max, 1, 2.06),
                                fake_run(NormalizationKind::data_max, 3, 9.0, false)};
    const auto r = assemble_report(runs, "cfg");
    ASSERT_EQ(r.methods.size(), 2u);
    EXPECT_EQ(r.methods[0].method, NormalizationKind::data_max);
    EXPECT_EQ(r.methods[0].max_fapv, 2.06);
    EXPECT_EQ(r.methods[0].failed, 1u);
    EXPECT_EQ(r.methods[0].fapv.n, 3u);
    EXPECT_EQ(r.failed_runs, 1u);
    EXPECT_EQ(r.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3}));
    ASSERT_EQ(r.methods[0].runs.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r.methods[0].runs[i].seed, i);
    EXPECT_EQ(r.methods[0].fapv_samples(), (std::vector<double>{1.1, 2.06, 0.9}));

    std::reverse(runs.begin(), runs.end());
    const auto again = assemble_report(runs, "cfg");
    EXPECT_EQ(again.methods[0].method, NormalizationKind::data_max);
    EXPECT_EQ(again.methods[0].fapv, r.methods[0].fapv);
}

TEST(AssembleReport, AllFailedThrows) {
    try {
        assemble_report({fake_run(NormalizationKind::last_price, 0, 1.0, false)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AllRunsFailed);
    }
}

TEST(Summary, JsonRoundTripsBitwise) {
    auto nan_run = fake_run(NormalizationKind::last_price, 4, 1.0 / 3.0);
    nan_run.metrics.sharpe = std::numeric_limits<double>::quiet_NaN();
    nan_run.scales = {{"S1", 0.1}, {"S2", 1e300}};
    const auto r = assemble_report({fake_run(NormalizationKind::last_price, 1, 0.1 + 0.2), nan_run,
                                    fake_run(NormalizationKind::last_close, 1, 2.0, false)},
                                   "x = 1\n");
    const auto back = parse_summary_json(summary_json(r));
    EXPECT_TRUE(same_summary(r, back));
    EXPECT_EQ(back.methods[0].runs[1].scales, nan_run.scales);
    EXPECT_THROW(parse_summary_json("{not json"), Error);
}

TEST(Summary, SchemaHasTheDocumentedFields) {
    const auto r = assemble_report({fake_run(NormalizationKind::data_max, 0, 1.2)});
    const auto j = nlohmann::json::parse(summary_json(r));
    EXPECT_EQ(j.at("format"), "folio-campaign");
    EXPECT_EQ(j.at("version"), 1);
    for (const char* key : {"conventions", "seeds", "failed_runs", "methods"}) EXPECT_TRUE(j.contains(key)) << key;
    const auto& m = j.at("methods").at(0);
    for (const char* key : {"method", "failed", "max_fapv", "aggregates", "runs"}) EXPECT_TRUE(m.contains(key)) << key;
    for (const char* key : {"fapv", "mdd", "sharpe", "sharpe_excess"}) {
        const auto& a = m.at("aggregates").at(key);
        for (const char* field : {"mean", "half_width", "n", "single_sample"}) EXPECT_TRUE(a.contains(field)) << field;
    }
    const auto& run = m.at("runs").at(0);
    for (const char* key : {"seed", "ok", "error", "fapv", "mdd", "sharpe", "sharpe_excess", "n_steps", "trajectory"})
        EXPECT_TRUE(run.contains(key)) << key;
    EXPECT_FALSE(run.contains("wall_seconds"));
}

TEST(EmitReport, AllFailedWritesNothing) {
    const auto dir = fresh_dir("emit_guard") / "out";
    CampaignReport empty;
    EXPECT_THROW(emit_report(empty, dir), Error);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(Campaign, EndToEndOutputs) {
    const auto dir = fresh_dir("campaign");
    auto cfg = campaign_config(dir, 2, 10, 1);
    std::size_t callbacks = 0;
    const auto report = run_campaign(cfg, {2, [&](const RunResult&) { ++callbacks; }});
    EXPECT_EQ(callbacks, 6u);
    EXPECT_EQ(report.failed_runs, 0u);
    EXPECT_EQ(report.seeds, (std::vector<std::uint64_t>{3, 4}));
    ASSERT_EQ(report.methods.size(), 3u);
    for (const auto& m : report.methods) {
        EXPECT_EQ(m.fapv.n, 2u);
        for (const auto& run : m.runs) {
            EXPECT_TRUE(run.ok) << run.error;
            // 49 test rows give 48 transitions
            EXPECT_EQ(run.metrics.n_steps, 48u);
            EXPECT_EQ(run.validation.size(), 2u);
            EXPECT_EQ(run.scales.empty(), m.method != NormalizationKind::data_max);
        }
    }

    const auto out = dir / "out";
    emit_report(report, out);
    for (const char* f : {"summary.json", "runs.csv", "config.txt", "timings.csv", "fapv_last_close.csv",
                          "fapv_last_price.csv", "fapv_data_max.csv", "trajectories/data_max_seed4.csv",
                          "logs/last_close_seed3_loss.csv", "logs/last_close_seed3_validation.csv"})
        EXPECT_TRUE(fs::exists(out / f)) << f;

    std::ifstream fapv_list(out / "fapv_data_max.csv");
    std::size_t lines = 0;
    for (std::string line; std::getline(fapv_list, line);)
        if (!line.empty()) ++lines;
    EXPECT_EQ(lines, 2u);

    std::ifstream traj(out / "trajectories/data_max_seed4.csv");
    std::size_t rows = 0;
    for (std::string line; std::getline(traj, line);) ++rows;
    EXPECT_EQ(rows, 1u + 1u + 48u);

    const auto regenerated = regenerate_report(out);
    EXPECT_TRUE(same_summary(regenerated, report));
    EXPECT_NE(format_table(report).find("data_max"), std::string::npos);

    std::ifstream summary(out / "summary.json");
    std::stringstream text;
    text << summary.rdbuf();
    EXPECT_TRUE(same_summary(parse_summary_json(text.str()), report));
}

TEST(Campaign, WorkerCountDoesNotChangeResults) {
    const auto dir = fresh_dir("determinism");
    auto cfg = campaign_config(dir, 2, 8, 1);
    cfg.methods = {NormalizationKind::last_close, NormalizationKind::data_max};
    const auto serial = run_campaign(cfg, {1, {}});
    const auto parallel = run_campaign(cfg, {3, {}});
    EXPECT_TRUE(same_summary(serial, parallel));
    EXPECT_EQ(summary_json(serial), summary_json(parallel));
}

TEST(Campaign, DegenerateSingleRunWithoutTraining) {
    const auto dir = fresh_dir("degenerate");
    const auto report = run_campaign(campaign_config(dir, 1, 0, 0));
    for (const auto& m : report.methods) {
        EXPECT_TRUE(m.fapv.single_sample);
        EXPECT_EQ(m.fapv.half_width, 0.0);
        EXPECT_EQ(m.max_fapv, m.fapv.mean);
        EXPECT_TRUE(m.runs[0].loss_log.empty());
    }
    EXPECT_NE(format_table(report).find("±"), std::string::npos);
}

TEST(Campaign, BadManifestFailsBeforeAnyRun) {
    auto cfg = parse_text(kMinimalConfig, "/nonexistent");
    EXPECT_THROW(run_campaign(cfg), Error);
}

}  // namespace
}  // namespace folio
