#include "folio/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "folio/errors.hpp"
#include "json.hpp"

namespace folio {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json aggregate_json(const Aggregate& a) {
    return {{"mean", real(a.mean)}, {"half_width", real(a.half_width)}, {"n", a.n}, {"single_sample", a.single_sample}};
}

Aggregate aggregate_from(const json& j) {
    return {real_from(j.at("mean")), real_from(j.at("half_width")), j.at("n").get<std::size_t>(),
            j.at("single_sample").get<bool>()};
}

NormalizationKind method_from(const std::string& s) {
    auto m = parse_normalization(s);
    if (!m) throw Error(ErrorCode::InvalidConfig, "unknown method '" + s + "' in summary");
    return *m;
}

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool bits_equal(double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return true;
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool same_aggregate(const Aggregate& a, const Aggregate& b) {
    return bits_equal(a.mean, b.mean) && bits_equal(a.half_width, b.half_width) && a.n == b.n &&
           a.single_sample == b.single_sample;
}

bool same_run(const RunResult& a, const RunResult& b) {
    return a.method == b.method && a.seed == b.seed && a.ok == b.ok && a.error == b.error &&
           a.trajectory_file == b.trajectory_file && bits_equal(a.metrics.fapv, b.metrics.fapv) &&
           bits_equal(a.metrics.mdd, b.metrics.mdd) && bits_equal(a.metrics.sharpe, b.metrics.sharpe) &&
           bits_equal(a.metrics.sharpe_excess, b.metrics.sharpe_excess) && a.metrics.n_steps == b.metrics.n_steps &&
           a.scales == b.scales;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string stem_of(const RunResult& r) {
    return std::string(to_string(r.method)) + "_seed" + std::to_string(r.seed);
}

void write_tables(const CampaignReport& report, const std::filesystem::path& dir) {
    {
        const auto path = dir / "summary.json";
        auto out = open_out(path);
        out << summary_json(report);
        check_written(out, path);
    }
    {
        const auto path = dir / "runs.csv";
        auto out = open_out(path);
        out << "method,seed,ok,fapv,mdd,sharpe,sharpe_excess,n_steps,trajectory,error\n";
        for (const auto& m : report.methods) {
            for (const auto& r : m.runs) {
                out << to_string(r.method) << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',' << g17(r.metrics.fapv)
                    << ',' << g17(r.metrics.mdd) << ',' << g17(r.metrics.sharpe) << ','
                    << g17(r.metrics.sharpe_excess) << ',' << r.metrics.n_steps << ',' << r.trajectory_file << ",\"";
                for (char ch : r.error) out << (ch == '"' ? '\'' : ch);
                out << "\"\n";
            }
        }
        check_written(out, path);
    }
    for (const auto& m : report.methods) {
        const auto path = dir / ("fapv_" + std::string(to_string(m.method)) + ".csv");
        auto out = open_out(path);
        for (double v : m.fapv_samples()) out << g17(v) << '\n';
        check_written(out, path);
    }
}

}  // namespace

std::string summary_json(const CampaignReport& report) {
    json methods = json::array();
    for (const auto& m : report.methods) {
        json runs = json::array();
        for (const auto& r : m.runs) {
            json scales = json::array();
            for (const auto& [ticker, v] : r.scales) scales.push_back({{"ticker", ticker}, {"scale", v}});
            runs.push_back({{"seed", r.seed},
                            {"ok", r.ok},
                            {"error", r.error},
                            {"fapv", real(r.metrics.fapv)},
                            {"mdd", real(r.metrics.mdd)},
                            {"sharpe", real(r.metrics.sharpe)},
                            {"sharpe_excess", real(r.metrics.sharpe_excess)},
                            {"n_steps", r.metrics.n_steps},
                            {"trajectory", r.trajectory_file},
                            {"scales", scales}});
        }
        methods.push_back({{"method", std::string(to_string(m.method))},
                           {"failed", m.failed},
                           {"max_fapv", real(m.max_fapv)},
                           {"aggregates",
                            {{"fapv", aggregate_json(m.fapv)},
                             {"mdd", aggregate_json(m.mdd)},
                             {"sharpe", aggregate_json(m.sharpe)},
                             {"sharpe_excess", aggregate_json(m.sharpe_excess)}}},
                           {"runs", runs}});
    }
    json doc = {{"format", "folio-campaign"},
                {"version", kFormatVersion},
                {"conventions", {{"half_width", kHalfWidthConvention}, {"sharpe", kSharpeConvention}}},
                {"seeds", report.seeds},
                {"failed_runs", report.failed_runs},
                {"methods", methods}};
    return doc.dump(2) + "\n";
}

CampaignReport parse_summary_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("malformed summary: ") + e.what());
    }
    try {
        if (doc.at("format") != "folio-campaign" || doc.at("version") != kFormatVersion) {
            throw Error(ErrorCode::IoError, "unsupported summary format");
        }
        CampaignReport report;
        report.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        report.failed_runs = doc.at("failed_runs").get<std::size_t>();
        for (const auto& jm : doc.at("methods")) {
            MethodSummary m;
            m.method = method_from(jm.at("method").get<std::string>());
            m.failed = jm.at("failed").get<std::size_t>();
            m.max_fapv = real_from(jm.at("max_fapv"));
            const auto& ja = jm.at("aggregates");
            m.fapv = aggregate_from(ja.at("fapv"));
            m.mdd = aggregate_from(ja.at("mdd"));
            m.sharpe = aggregate_from(ja.at("sharpe"));
            m.sharpe_excess = aggregate_from(ja.at("sharpe_excess"));
            for (const auto& jr : jm.at("runs")) {
                RunResult r;
                r.method = m.method;
                r.seed = jr.at("seed").get<std::uint64_t>();
                r.ok = jr.at("ok").get<bool>();
                r.error = jr.at("error").get<std::string>();
                r.metrics.fapv = real_from(jr.at("fapv"));
                r.metrics.mdd = real_from(jr.at("mdd"));
                r.metrics.sharpe = real_from(jr.at("sharpe"));
                r.metrics.sharpe_excess = real_from(jr.at("sharpe_excess"));
                r.metrics.n_steps = jr.at("n_steps").get<std::size_t>();
                r.trajectory_file = jr.at("trajectory").get<std::string>();
                for (const auto& js : jr.at("scales")) {
                    r.scales.emplace_back(js.at("ticker").get<std::string>(), js.at("scale").get<double>());
                }
                m.runs.push_back(std::move(r));
            }
            report.methods.push_back(std::move(m));
        }
        return report;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("malformed summary: ") + e.what());
    }
}

bool same_summary(const CampaignReport& a, const CampaignReport& b) {
    if (a.seeds != b.seeds || a.failed_runs != b.failed_runs || a.methods.size() != b.methods.size()) return false;
    for (std::size_t i = 0; i < a.methods.size(); ++i) {
        const auto& x = a.methods[i];
        const auto& y = b.methods[i];
        if (x.method != y.method || x.failed != y.failed || !bits_equal(x.max_fapv, y.max_fapv) ||
            !same_aggregate(x.fapv, y.fapv) || !same_aggregate(x.mdd, y.mdd) || !same_aggregate(x.sharpe, y.sharpe) ||
            !same_aggregate(x.sharpe_excess, y.sharpe_excess) || x.runs.size() != y.runs.size()) {
            return false;
        }
        for (std::size_t k = 0; k < x.runs.size(); ++k) {
            if (!same_run(x.runs[k], y.runs[k])) return false;
        }
    }
    return true;
}

void emit_report(const CampaignReport& report, const std::filesystem::path& out_dir) {
    bool any_ok = false;
    for (const auto& m : report.methods) {
        for (const auto& r : m.runs) any_ok = any_ok || r.ok;
    }
    if (!any_ok) throw Error(ErrorCode::AllRunsFailed, "refusing to emit a report without successful runs");

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "trajectories", ec);
    if (!ec) std::filesystem::create_directories(out_dir / "logs", ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

    write_tables(report, out_dir);
    {
        const auto path = out_dir / "config.txt";
        auto out = open_out(path);
        out << report.config_text << "# seeds:";
        for (auto s : report.seeds) out << ' ' << s;
        out << '\n';
        check_written(out, path);
    }
    {
        const auto path = out_dir / "timings.csv";
        auto out = open_out(path);
        out << "method,seed,wall_seconds\n";
        for (const auto& m : report.methods) {
            for (const auto& r : m.runs) out << to_string(r.method) << ',' << r.seed << ',' << g17(r.wall_seconds) << '\n';
        }
        check_written(out, path);
    }
    for (const auto& m : report.methods) {
        for (const auto& r : m.runs) {
            if (!r.ok) continue;
            {
                const auto path = out_dir / r.trajectory_file;
                auto out = open_out(path);
                const std::size_t width = r.trajectory.points.empty() ? 0 : r.trajectory.points.front().action.size();
                out << "step,value,reward";
                for (std::size_t i = 0; i < width; ++i) out << ",w" << i;
                out << '\n' << "-1," << g17(r.trajectory.initial_value) << ",0";
                for (std::size_t i = 0; i < width; ++i) out << ',' << (i == 0 ? "1" : "0");
                out << '\n';
                for (const auto& p : r.trajectory.points) {
                    out << p.step << ',' << g17(p.value) << ',' << g17(p.reward);
                    for (double w : p.action.values()) out << ',' << g17(w);
                    out << '\n';
                }
                check_written(out, path);
            }
            {
                const auto path = out_dir / "logs" / (stem_of(r) + "_loss.csv");
                auto out = open_out(path);
                out << "step,loss\n";
                for (const auto& l : r.loss_log) out << l.step << ',' << g17(l.loss) << '\n';
                check_written(out, path);
            }
            {
                const auto path = out_dir / "logs" / (stem_of(r) + "_validation.csv");
                auto out = open_out(path);
                out << "step,fapv\n";
                for (const auto& v : r.validation) out << v.step << ',' << g17(v.fapv) << '\n';
                check_written(out, path);
            }
        }
    }
}

CampaignReport regenerate_report(const std::filesystem::path& campaign_dir) {
    const auto path = campaign_dir / "summary.json";
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    CampaignReport stored = parse_summary_json(buf.str());

    std::vector<RunResult> runs;
    for (auto& m : stored.methods) {
        for (auto& r : m.runs) runs.push_back(std::move(r));
    }
    std::string config_text;
    if (std::ifstream cfg(campaign_dir / "config.txt"); cfg) {
        std::stringstream cb;
        cb << cfg.rdbuf();
        config_text = cb.str();
    }
    CampaignReport fresh = assemble_report(std::move(runs), std::move(config_text));
    write_tables(fresh, campaign_dir);
    return fresh;
}

std::string format_table(const CampaignReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %5s %20s %20s %20s %20s\n", "method", "runs", "FAPV", "MDD", "SR",
                  "SR(rho-1)");
    out << line;
    auto cell = [](const Aggregate& a) {
        char buf[64];
        if (a.n == 0) return std::string("n/a");
        std::snprintf(buf, sizeof(buf), "%.4f ± %.4f", a.mean, a.half_width);
        return std::string(buf);
    };
    for (const auto& m : report.methods) {
        std::snprintf(line, sizeof(line), "%-12s %5zu %20s %20s %20s %20s\n", std::string(to_string(m.method)).c_str(),
                      m.runs.size() - m.failed, cell(m.fapv).c_str(), cell(m.mdd).c_str(), cell(m.sharpe).c_str(),
                      cell(m.sharpe_excess).c_str());
        out << line;
    }
    out << "\nmax FAPV\n";
    for (const auto& m : report.methods) {
        std::snprintf(line, sizeof(line), "%-12s %.4f\n", std::string(to_string(m.method)).c_str(), m.max_fapv);
        out << line;
    }
    if (report.failed_runs > 0) out << "\nwarning: " << report.failed_runs << " failed run(s) excluded\n";
    out << "\n" << kHalfWidthConvention << "\n" << kSharpeConvention << "\n";
    return out.str();
}

}  // namespace folio
