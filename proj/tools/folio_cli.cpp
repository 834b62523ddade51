#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "folio/config.hpp"
#include "folio/errors.hpp"
#include "folio/experiment.hpp"
#include "folio/report.hpp"
#include "folio/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const fs::path& config_path, const fs::path& out_dir, std::size_t workers,
            std::optional<std::size_t> runs, std::optional<std::size_t> steps) {
    folio::ExperimentConfig config = folio::load_config(config_path);
    if (runs) config.runs = *runs;
    if (steps) config.trainer.steps = *steps;
    folio::validate_config(config);

    const std::size_t total = config.runs * config.methods.size();
    std::size_t done = 0;
    folio::CampaignOptions options;
    options.workers = workers;
    options.on_run_done = [&](const folio::RunResult& r) {
        ++done;
        if (r.ok) {
            std::fprintf(stderr, "[%zu/%zu] %s seed %llu: fapv %.4f mdd %.4f (%.1fs)\n", done, total,
                         std::string(folio::to_string(r.method)).c_str(), static_cast<unsigned long long>(r.seed),
                         r.metrics.fapv, r.metrics.mdd, r.wall_seconds);
        } else {
            std::fprintf(stderr, "[%zu/%zu] %s seed %llu: FAILED: %s\n", done, total,
                         std::string(folio::to_string(r.method)).c_str(), static_cast<unsigned long long>(r.seed),
                         r.error.c_str());
        }
    };
    const folio::CampaignReport report = folio::run_campaign(config, options);
    folio::emit_report(report, out_dir);
    std::cout << folio::format_table(report) << "report written to " << out_dir.string() << '\n';
    return 0;
}

int cmd_report(const fs::path& dir) {
    const folio::CampaignReport report = folio::regenerate_report(dir);
    std::cout << folio::format_table(report);
    return 0;
}

int cmd_validate(const fs::path& config_path) {
    const folio::ExperimentConfig config = folio::load_config(config_path);
    const folio::MarketFrame frame = folio::load_campaign_frame(config);
    std::cout << "assets:";
    for (const auto& t : frame.tickers()) std::cout << ' ' << t;
    std::cout << "\ncalendar: " << folio::format_date(frame.calendar().front()) << " .. "
              << folio::format_date(frame.calendar().back()) << " (" << frame.length() << " rows)\n";
    for (auto method : config.methods) {
        const folio::MethodMarkets m = folio::prepare_markets(config, frame, method);
        std::cout << folio::to_string(method) << ": train " << m.train.decision_count() << " decisions, test "
                  << m.test.decision_count() << " decisions\n";
        if (m.train.decision_count() < config.trainer.batch_size + 1) {
            throw folio::Error(folio::ErrorCode::InsufficientTrainLength,
                               "training period too short for batch_size " + std::to_string(config.trainer.batch_size));
        }
    }
    std::cout << "ok\n";
    return 0;
}

int cmd_synth(const fs::path& out_dir, std::size_t assets, std::size_t length, std::uint64_t seed,
              const std::string& start, bool weekdays) {
    folio::SyntheticMarketSpec spec;
    for (std::size_t i = 0; i < assets; ++i) spec.tickers.push_back("S" + std::to_string(i + 1));
    spec.length = length;
    spec.seed = seed;
    spec.weekdays_only = weekdays;
    auto date = folio::parse_date(start);
    if (!date) throw folio::Error(folio::ErrorCode::InvalidConfig, "bad --start date '" + start + "'");
    spec.start = *date;

    folio::write_synthetic_dataset(out_dir, spec);
    std::cout << "wrote " << assets << " series to " << out_dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"folio: portfolio management with an EIIE policy"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "campaign";
    std::size_t workers = 1;
    std::optional<std::size_t> runs, steps;
    auto* run = app.add_subcommand("run", "train and backtest every (method, seed) of a config");
    run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "campaign output directory");
    run->add_option("--workers", workers, "concurrent runs")->check(CLI::PositiveNumber);
    run->add_option("--runs", runs, "override runs");
    run->add_option("--steps", steps, "override training steps");

    std::string campaign_dir;
    auto* report = app.add_subcommand("report", "recompute aggregates of an emitted campaign");
    report->add_option("campaign-dir", campaign_dir)->required()->check(CLI::ExistingDirectory);

    auto* validate = app.add_subcommand("validate", "check config and data without training");
    validate->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);

    std::string synth_dir, start = "2015-01-01";
    std::size_t assets = 9, length = 1500;
    std::uint64_t seed = 0;
    bool weekdays = false;
    auto* synth = app.add_subcommand("synth", "write a seeded synthetic market and its manifest");
    synth->add_option("out-dir", synth_dir)->required();
    synth->add_option("--assets", assets)->check(CLI::PositiveNumber);
    synth->add_option("--length", length)->check(CLI::PositiveNumber);
    synth->add_option("--seed", seed);
    synth->add_option("--start", start, "first date, YYYY-MM-DD");
    synth->add_flag("--weekdays", weekdays, "skip Saturdays and Sundays");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, out_dir, workers, runs, steps);
        if (*report) return cmd_report(campaign_dir);
        if (*validate) return cmd_validate(config_path);
        if (*synth) return cmd_synth(synth_dir, assets, length, seed, start, weekdays);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
