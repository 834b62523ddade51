// One PASS/FAIL line per acceptance criterion; exit status 1 if any gate fails.
// Usage: folio_acceptance [--replication CONFIG]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "folio/config.hpp"
#include "folio/errors.hpp"
#include "folio/experiment.hpp"
#include "folio/metrics.hpp"
#include "folio/report.hpp"
#include "folio/transaction_cost.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace folio;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

int failures = 0;

void run(const char* name, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
}

Outcome mu_oracle() {
    Rng rng(1);
    std::vector<std::pair<WeightVector, WeightVector>> pairs;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 12);
        pairs.emplace_back(testing::random_simplex(n, rng, 0.3), testing::random_simplex(n, rng, 0.3));
    }
    double worst_ledger = 0.0, worst_bisection = 0.0, solver_seconds = 0.0;
    for (double c : {0.0, 0.0025, 0.01}) {
        std::vector<double> mu(pairs.size());
        const auto t0 = Clock::now();
        for (std::size_t k = 0; k < pairs.size(); ++k) mu[k] = transaction_factor(pairs[k].first, pairs[k].second, c);
        solver_seconds += seconds_since(t0);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            worst_ledger = std::max(worst_ledger, std::abs(mu[k] - testing::ledger_mu(pairs[k].first, pairs[k].second, c)));
            worst_bisection = std::max(
                worst_bisection, std::abs(mu[k] - transaction_factor_oracle(pairs[k].first, pairs[k].second, c)));
        }
    }
    bool closed_forms = true;
    double worst_liquidation = 0.0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 12);
        const auto w = testing::random_simplex(n, rng, 0.2);
        for (double c : {0.0, 0.0025, 0.01}) closed_forms = closed_forms && transaction_factor(w, w, c) == 1.0;
        auto risky = testing::random_simplex_values(n, rng);
        std::vector<double> from{0.0};
        from.insert(from.end(), risky.begin(), risky.end());
        const double s = std::accumulate(from.begin(), from.end(), 0.0);
        for (auto& x : from) x /= s;
        for (double c : {0.0025, 0.01})
            worst_liquidation = std::max(
                worst_liquidation,
                std::abs(transaction_factor(WeightVector::from_action(from), WeightVector::all_cash(n), c) - (1.0 - c)));
    }
    const bool pass = worst_ledger < 1e-10 && worst_bisection < 1e-10 && solver_seconds < 1.0 && closed_forms &&
                      worst_liquidation < 1e-12;
    return {pass, fmt("3000 pairs, max |mu - ledger| %.2e, max |mu - bisection| %.2e, solver %.3f s; "
                      "identity mu == 1 %s; liquidation max err %.2e",
                      worst_ledger, worst_bisection, solver_seconds, closed_forms ? "exact" : "VIOLATED",
                      worst_liquidation)};
}

Outcome gradient_correctness() {
    const auto t0 = Clock::now();
    double worst = 0.0, worst_norm = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        Market m(testing::random_frame(3, 40, 500 + k), NormalizationScheme::last_close(), 8, 0.0025, 1.0);
        auto p = init_policy(3, 8, k);
        Rng rng(k, 5);
        for (auto& b : p.blocks)
            for (auto& v : b.value.storage()) v += rng.uniform(-0.3, 0.3);
        const auto buf = fill_buffer(m, p);
        const std::size_t start = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(buf.size() - 4));
        const auto check = testing::check_objective_gradient(p, buf, {start, start + 4}, 0.0025);
        worst = std::max(worst, check.max_relative);
        worst_norm = std::max(worst_norm, check.norm_relative);
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 30.0,
            fmt("n=3 t=8 batch=4 c=0.0025, 20 instances x 303 params: max coordinate rel err %.2e "
                "(denominator floor 1e-8), max norm rel err %.2e",
                worst, worst_norm)};
}

Outcome conservation() {
    Rng rng(3);
    double worst = 0.0;
    bool mu_ok = true;
    std::size_t rebalances = 0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const double c = k < 100 ? 0.0 : 0.0025;
        Market m(testing::random_frame(4, 210, 900 + k), NormalizationScheme::last_close(), 10, c, 1000.0);
        Observation obs = env_reset(m);
        EnvState s = obs.state;
        double rewards = 0.0;
        while (!s.terminal) {
            const auto action = testing::random_simplex_values(5, rng, 0.3);
            const StepResult r = env_step(m, s, action);
            rewards += r.reward;
            mu_ok = mu_ok && r.mu <= 1.0 && r.state.value <= s.drifted_value;
            ++rebalances;
            s = r.state;
        }
        if (c == 0.0) worst = std::max(worst, std::abs(std::exp(rewards) / (s.drifted_value / 1000.0) - 1.0));
    }
    return {worst < 1e-9 && mu_ok,
            fmt("100 frictionless 200-step rollouts: max |exp(sum r) / (V_T/V_0) - 1| %.2e; "
                "%zu rebalances with mu <= 1 and V non-increasing: %s",
                worst, rebalances, mu_ok ? "yes" : "NO")};
}

Outcome simplex_safety() {
    Rng rng(4);
    double worst = 0.0;
    std::size_t violations = 0;
    for (int k = 0; k < 10000; ++k) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 11);
        const std::size_t t = 4 + static_cast<std::size_t>(rng.uniform01() * 20);
        auto p = init_policy(n, t, static_cast<std::uint64_t>(k));
        const double scale = std::exp(rng.uniform(-2.0, 3.0));
        for (auto& b : p.blocks)
            for (auto& v : b.value.storage()) v = v * scale + rng.uniform(-1.0, 1.0) * (b.decays ? 0.0 : scale);
        ad::Tensor x({kFeatureCount, n, t});
        for (auto& v : x.storage()) v = std::exp(rng.uniform(-4.0, 4.0));
        const auto a = policy_forward(p, StateTensor{x, t - 1}, testing::random_simplex(n, rng, 0.5));
        double sum = 0.0;
        for (double w : a.values()) {
            if (!(w >= 0.0 && w <= 1.0)) ++violations;
            sum += w;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return {violations == 0 && worst <= 1e-9,
            fmt("10000 random states/params (n 1..11, window 4..23): max |sum - 1| %.2e, out-of-range entries %zu",
                worst, violations)};
}

Outcome normalization_properties() {
    Rng rng(5);
    bool close_ones = true, price_ones = true, max_high_one = true;
    double worst_invariance = 0.0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const std::size_t n = 1 + k % 9;
        const auto frame = testing::random_frame(n, 120, 1000 + k, 0.05);
        const std::size_t window = 5 + k % 40;
        const std::size_t step = window - 1 + static_cast<std::size_t>(rng.uniform01() * (120 - window));
        const auto raw = extract_window(frame, step, window);
        const auto lc = normalize_last_close(raw), lp = normalize_last_price(raw);
        for (std::size_t i = 0; i < n; ++i) {
            close_ones = close_ones && lc.values.at(kClose, i, window - 1) == 1.0;
            for (std::size_t f = 0; f < kFeatureCount; ++f)
                price_ones = price_ones && lp.values.at(f, i, window - 1) == 1.0;
        }
        std::vector<double> divisors(n);
        for (auto& d : divisors) d = 1.0 / std::exp(rng.uniform(-10.0, 10.0));
        const auto scaled_raw = extract_window(frame.scaled(divisors), step, window);
        const auto lc2 = normalize_last_close(scaled_raw), lp2 = normalize_last_price(scaled_raw);
        for (std::size_t j = 0; j < lc.values.size(); ++j) {
            worst_invariance = std::max(worst_invariance, std::abs(lc2.values[j] / lc.values[j] - 1.0));
            worst_invariance = std::max(worst_invariance, std::abs(lp2.values[j] / lp.values[j] - 1.0));
        }
        const auto train = frame.slice(0, 80);
        const auto scaled = apply_data_max(fit_data_max(train), train);
        for (std::size_t i = 0; i < n; ++i) {
            double top = 0.0;
            for (std::size_t t = 0; t < scaled.length(); ++t) top = std::max(top, scaled.high(i, t));
            max_high_one = max_high_one && top == 1.0;
        }
    }
    return {close_ones && price_ones && max_high_one && worst_invariance < 1e-12,
            fmt("200 frames: last_close close column ones %s, last_price last columns ones %s, "
                "data_max train max high == 1 %s, max scale-invariance rel err %.2e",
                close_ones ? "yes" : "NO", price_ones ? "yes" : "NO", max_high_one ? "yes" : "NO",
                worst_invariance)};
}

Outcome metric_oracles() {
    Rng rng(6);
    std::size_t mdd_mismatch = 0;
    double worst_fapv = 0.0, worst_sharpe = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t len = 3 + static_cast<std::size_t>(rng.uniform01() * 498);
        std::vector<double> v{rng.uniform(1.0, 1e6)};
        for (std::size_t t = 1; t < len; ++t) v.push_back(v.back() * std::exp(rng.uniform(-0.1, 0.1)));
        if (mdd(v) != testing::brute_force_mdd(v)) ++mdd_mismatch;
        worst_fapv = std::max(worst_fapv, std::abs(fapv(v) / (v.back() / v.front()) - 1.0));

        long double mean = 0.0L, m2 = 0.0L;
        for (std::size_t t = 1; t < len; ++t) {
            const long double r = static_cast<long double>(v[t]) / v[t - 1];
            const long double delta = r - mean;
            mean += delta / static_cast<long double>(t);
            m2 += delta * (r - mean);
        }
        const long double oracle = mean / std::sqrt(m2 / static_cast<long double>(len - 1));
        worst_sharpe = std::max(worst_sharpe, static_cast<double>(std::abs(sharpe(v) / oracle - 1.0L)));
    }
    return {mdd_mismatch == 0 && worst_fapv < 1e-12 && worst_sharpe < 1e-12,
            fmt("1000 trajectories (L <= 500): MDD mismatches vs all-pairs %zu, max FAPV rel err %.2e, "
                "max Sharpe rel err vs long-double Welford %.2e",
                mdd_mismatch, worst_fapv, worst_sharpe)};
}

Outcome sampling_distribution() {
    const std::size_t buffer = 450, batch = 200, latest = buffer - batch;
    const double beta = 0.002;
    const int draws = 1000000;
    Rng rng(7);
    std::vector<double> counts(latest + 1, 0.0);
    for (int k = 0; k < draws; ++k) counts[sample_batch(buffer, batch, beta, rng).begin] += 1.0;
    std::vector<double> pmf(latest + 1);
    double norm = 0.0;
    for (std::size_t k = 0; k <= latest; ++k) norm += pmf[latest - k] = beta * std::pow(1.0 - beta, k);
    double tv = 0.0;
    for (std::size_t s = 0; s <= latest; ++s) tv += std::abs(counts[s] / draws - pmf[s] / norm);
    tv *= 0.5;
    return {tv < 0.01, fmt("10^6 draws, buffer %zu, batch %zu, beta 0.002: total variation %.4f", buffer, batch, tv)};
}

Outcome learning_sanity() {
    const std::size_t window = 50, length = 600;
    const std::vector<double> growth{1.01, 1.0, 1.0};
    const Market market(trending_frame(growth, length), NormalizationScheme::last_close(), window, 0.0025, 1.0);
    TrainerConfig cfg;  // default hyperparameters (lr 5e-5, batch 200, beta 0.002)
    Trainer trainer(market, init_policy(3, window, 0), cfg, 0);

    Observation obs = env_reset(market);
    EnvState s = obs.state;
    const auto equal = WeightVector::equal_risky(3);
    while (!s.terminal) s = env_step(market, s, equal.values()).state;
    const double baseline = s.drifted_value / market.initial_value();

    double mean_weight = 0.0, trained_fapv = 0.0;
    const auto t0 = Clock::now();
    while (true) {
        const auto traj = evaluate(market, trainer.params());
        mean_weight = 0.0;
        for (const auto& p : traj.points) mean_weight += p.action[1];
        mean_weight /= static_cast<double>(traj.size());
        trained_fapv = fapv(traj, market.initial_value());
        if ((mean_weight > 0.9 && trained_fapv > baseline) || trainer.steps_done() >= 20000) break;
        trainer.train(1000);
    }
    const double secs = seconds_since(t0);
    return {mean_weight > 0.9 && trained_fapv > baseline && secs < 600.0,
            fmt("%zu steps: mean weight on rising asset %.4f, training FAPV %.4g vs equal-weight %.4g",
                trainer.steps_done(), mean_weight, trained_fapv, baseline)};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("folio_acceptance_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    return dir;
}

bool same_run(const RunResult& a, const RunResult& b) {
    auto bits = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
    if (a.ok != b.ok || a.error != b.error || a.scales != b.scales || a.trajectory.size() != b.trajectory.size() ||
        a.loss_log.size() != b.loss_log.size() || a.validation.size() != b.validation.size())
        return false;
    if (!bits(a.metrics.fapv, b.metrics.fapv) || !bits(a.metrics.mdd, b.metrics.mdd) ||
        !bits(a.metrics.sharpe, b.metrics.sharpe) || !bits(a.metrics.sharpe_excess, b.metrics.sharpe_excess))
        return false;
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
        const auto &p = a.trajectory.points[i], &q = b.trajectory.points[i];
        if (!bits(p.value, q.value) || !bits(p.reward, q.reward) || !(p.action == q.action)) return false;
    }
    for (std::size_t i = 0; i < a.loss_log.size(); ++i)
        if (!bits(a.loss_log[i].loss, b.loss_log[i].loss)) return false;
    for (std::size_t i = 0; i < a.validation.size(); ++i)
        if (!bits(a.validation[i].fapv, b.validation[i].fapv)) return false;
    return true;
}

Outcome determinism() {
    const auto dir = scratch_dir("determinism");
    SyntheticMarketSpec spec;
    spec.tickers = {"S1", "S2", "S3", "S4"};
    spec.length = 260;
    spec.seed = 11;
    write_synthetic_dataset(dir / "data", spec);
    std::istringstream text(
        "manifest = data/manifest.txt\ntrain_start = 2015-01-01\ntrain_end = 2015-07-31\n"
        "test_start = 2015-08-01\ntest_end = 2015-09-17\ntime_window = 12\nbatch_size = 30\n"
        "learning_rate = 1e-3\nsample_bias = 0.05\nsteps = 40\nonline_steps = 2\nruns = 3\n"
        "validation_points = 4\nlog_every = 10\n");
    const auto cfg = parse_config(text, dir);
    const auto frame = load_campaign_frame(cfg);

    std::size_t reruns = 0, identical = 0;
    for (auto m : cfg.methods) {
        for (std::uint64_t seed : {0, 7}) {
            ++reruns;
            if (same_run(run_single(cfg, frame, m, seed), run_single(cfg, frame, m, seed))) ++identical;
        }
    }
    const auto serial = run_campaign(cfg, {1, {}});
    const auto concurrent = run_campaign(cfg, {3, {}});
    bool runs_match = serial.methods.size() == concurrent.methods.size();
    for (std::size_t i = 0; runs_match && i < serial.methods.size(); ++i)
        for (std::size_t k = 0; runs_match && k < serial.methods[i].runs.size(); ++k)
            runs_match = same_run(serial.methods[i].runs[k], concurrent.methods[i].runs[k]);
    const bool reports_match = same_summary(serial, concurrent) && summary_json(serial) == summary_json(concurrent);
    fs::remove_all(dir);
    return {identical == reruns && runs_match && reports_match,
            fmt("%zu/%zu (config, seed) reruns bitwise identical; serial vs 3 workers: runs %s, report %s", identical,
                reruns, runs_match ? "identical" : "DIFFER", reports_match ? "identical" : "DIFFERS")};
}

void replication(const char* config_path) {
    const auto t0 = Clock::now();
    if (!config_path) {
        std::printf("SOFT  reduced directional replication: not a gate, not run by default "
                    "(folio_acceptance --replication CONFIG runs 5 seeds x 20000 steps per method)\n");
        return;
    }
    try {
        auto cfg = load_config(config_path);
        cfg.runs = 5;
        cfg.trainer.steps = 20000;
        cfg.methods = {NormalizationKind::last_close, NormalizationKind::last_price, NormalizationKind::data_max};
        const auto report = run_campaign(cfg, {std::max(1u, std::thread::hardware_concurrency()), {}});
        double means[3] = {0, 0, 0};
        for (std::size_t i = 0; i < report.methods.size(); ++i) means[i] = report.methods[i].fapv.mean;
        const bool holds = means[2] >= means[0] && means[2] >= means[1];
        std::printf("SOFT  reduced directional replication: mean FAPV last_close %.4g, last_price %.4g, data_max %.4g; "
                    "data_max >= both state normalizations: %s [%.0f s]\n",
                    means[0], means[1], means[2], holds ? "yes" : "no", seconds_since(t0));
    } catch (const std::exception& e) {
        std::printf("SOFT  reduced directional replication: could not run (%s)\n", e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    const char* replication_config = nullptr;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--replication") == 0 && i + 1 < argc) {
            replication_config = argv[++i];
        } else {
            std::fprintf(stderr, "usage: %s [--replication CONFIG]\n", argv[0]);
            return 2;
        }
    }
    run("mu oracle equivalence", mu_oracle);
    run("gradient correctness", gradient_correctness);
    run("conservation", conservation);
    run("simplex safety", simplex_safety);
    run("normalization properties", normalization_properties);
    run("metric oracles", metric_oracles);
    run("sampling distribution", sampling_distribution);
    run("learning sanity", learning_sanity);
    replication(replication_config);
    run("determinism", determinism);
    std::printf("%d gate(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
