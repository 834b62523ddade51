#include "folio/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "folio/errors.hpp"

namespace folio {

MarketFrame load_campaign_frame(const ExperimentConfig& config) {
    PortfolioManifest manifest = load_manifest(config.manifest);
    if (config.alignment) manifest.alignment = *config.alignment;
    return load_portfolio(manifest);
}

MethodMarkets prepare_markets(const ExperimentConfig& config, const MarketFrame& frame, NormalizationKind method) {
    PeriodSplit split = split_periods(frame, config.train_range, config.test_range, config.time_window);
    NormalizationScheme scheme = NormalizationScheme::last_close();
    switch (method) {
        case NormalizationKind::last_close: break;
        case NormalizationKind::last_price: scheme = NormalizationScheme::last_price(); break;
        case NormalizationKind::data_max: scheme = fit_data_max(split.train); break;
    }
    Market train(std::move(split.train), scheme, config.time_window, config.commission_rate, config.initial_value);
    Market test(std::move(split.test), scheme, config.time_window, config.commission_rate, config.initial_value);
    return {std::move(scheme), std::move(train), std::move(test)};
}

std::string trajectory_file_name(NormalizationKind method, std::uint64_t seed) {
    return "trajectories/" + std::string(to_string(method)) + "_seed" + std::to_string(seed) + ".csv";
}

RunResult run_single(const ExperimentConfig& config, const MarketFrame& frame, NormalizationKind method,
                     std::uint64_t seed) {
    RunResult result;
    result.method = method;
    result.seed = seed;
    result.trajectory_file = trajectory_file_name(method, seed);
    const auto start = std::chrono::steady_clock::now();
    try {
        MethodMarkets markets = prepare_markets(config, frame, method);
        for (std::size_t i = 0; i < markets.scheme.scales().size(); ++i) {
            result.scales.emplace_back(markets.scheme.tickers()[i], markets.scheme.scales()[i]);
        }
        PolicyParams params = init_policy(config.policy_config(frame.n_assets()), seed);
        Trainer trainer(markets.train, std::move(params), config.trainer, seed);
        trainer.fill_buffer();

        const std::size_t steps = config.trainer.steps;
        const std::size_t every =
            config.validation_points > 0 ? std::max<std::size_t>(1, steps / config.validation_points) : 0;
        trainer.train(steps, [&](std::size_t done) {
            if (every != 0 && (done % every == 0 || done == steps)) {
                result.validation.push_back({done, fapv(evaluate(markets.test, trainer.params()), config.initial_value)});
            }
        });
        result.trajectory = trainer.backtest(markets.test, config.trainer.online_steps);
        result.loss_log = trainer.loss_log();
        result.metrics = compute_metrics(result.trajectory);
        if (!std::isfinite(result.metrics.fapv) || !std::isfinite(result.metrics.mdd)) {
            throw Error(ErrorCode::NonFiniteLoss, "backtest produced non-finite metrics");
        }
        result.ok = true;
    } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

Aggregate aggregate(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::TooShort, "aggregate of no values");
    Aggregate a;
    a.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(a.n);
    if (a.n == 1) {
        a.single_sample = true;
        return a;
    }
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
        a.mean = values.front();
        return a;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    const double sd = std::sqrt(ss / static_cast<double>(a.n - 1));
    a.half_width = 1.96 * sd / std::sqrt(static_cast<double>(a.n));
    return a;
}

std::vector<double> MethodSummary::fapv_samples() const {
    std::vector<double> out;
    for (const auto& r : runs) {
        if (r.ok) out.push_back(r.metrics.fapv);
    }
    return out;
}

MethodSummary summarize_method(NormalizationKind method, std::vector<RunResult> runs) {
    MethodSummary s;
    s.method = method;
    std::stable_sort(runs.begin(), runs.end(), [](const RunResult& a, const RunResult& b) { return a.seed < b.seed; });
    s.runs = std::move(runs);

    std::vector<double> f, m, sr, sx;
    for (const auto& r : s.runs) {
        if (!r.ok) {
            ++s.failed;
            continue;
        }
        f.push_back(r.metrics.fapv);
        m.push_back(r.metrics.mdd);
        if (std::isfinite(r.metrics.sharpe)) sr.push_back(r.metrics.sharpe);
        if (std::isfinite(r.metrics.sharpe_excess)) sx.push_back(r.metrics.sharpe_excess);
    }
    if (!f.empty()) {
        s.fapv = aggregate(f);
        s.mdd = aggregate(m);
        s.max_fapv = *std::max_element(f.begin(), f.end());
    }
    if (!sr.empty()) s.sharpe = aggregate(sr);
    if (!sx.empty()) s.sharpe_excess = aggregate(sx);
    return s;
}

CampaignReport assemble_report(std::vector<RunResult> runs, std::string config_text) {
    CampaignReport report;
    report.config_text = std::move(config_text);
    std::vector<NormalizationKind> order;
    std::map<NormalizationKind, std::vector<RunResult>> groups;
    std::size_t ok = 0;
    for (auto& r : runs) {
        if (!groups.count(r.method)) order.push_back(r.method);
        if (r.ok) ++ok;
        if (std::find(report.seeds.begin(), report.seeds.end(), r.seed) == report.seeds.end()) {
            report.seeds.push_back(r.seed);
        }
        groups[r.method].push_back(std::move(r));
    }
    if (ok == 0) throw Error(ErrorCode::AllRunsFailed, "no run of the campaign succeeded");
    std::sort(report.seeds.begin(), report.seeds.end());
    for (NormalizationKind m : order) {
        report.methods.push_back(summarize_method(m, std::move(groups[m])));
        report.failed_runs += report.methods.back().failed;
    }
    return report;
}

CampaignReport run_campaign(const ExperimentConfig& config, const CampaignOptions& options) {
    validate_config(config);
    const MarketFrame frame = load_campaign_frame(config);

    struct Task {
        NormalizationKind method;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (NormalizationKind m : config.methods) {
        for (std::size_t k = 0; k < config.runs; ++k) tasks.push_back({m, config.seed_for_run(k)});
    }

    std::vector<RunResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            results[i] = run_single(config, frame, tasks[i].method, tasks[i].seed);
            if (options.on_run_done) {
                std::lock_guard lock(report_mutex);
                options.on_run_done(results[i]);
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, tasks.size());
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    return assemble_report(std::move(results), render_config(config));
}

}  // namespace folio
