#include "folio/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>

#include "folio/errors.hpp"
#include "folio/rng.hpp"

namespace folio {

namespace {

// Box-Muller over uniform01.
double normal(Rng& rng) {
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<Date> make_calendar(Date start, std::size_t length, bool weekdays_only) {
    std::vector<Date> out;
    out.reserve(length);
    std::chrono::sys_days day{start};
    while (out.size() < length) {
        const std::chrono::weekday wd{day};
        if (!weekdays_only || (wd != std::chrono::Saturday && wd != std::chrono::Sunday)) out.emplace_back(day);
        day += std::chrono::days{1};
    }
    return out;
}

}  // namespace

std::vector<AssetSeries> generate_synthetic(const SyntheticMarketSpec& spec) {
    if (spec.tickers.empty() || spec.length == 0) throw Error(ErrorCode::EmptySeries, "synthetic market has no data");
    const auto calendar = make_calendar(spec.start, spec.length, spec.weekdays_only);
    std::vector<AssetSeries> out;
    for (std::size_t i = 0; i < spec.tickers.size(); ++i) {
        Rng rng(spec.seed, i + 1);
        AssetSeries s{spec.tickers[i], {}};
        s.rows.reserve(spec.length);
        double drift = spec.drift_sd * normal(rng);
        double prev = spec.start_price;
        for (std::size_t t = 0; t < spec.length; ++t) {
            if (rng.uniform01() >= spec.persistence) drift = spec.drift_sd * normal(rng);
            const double close = prev * std::exp(drift + spec.volatility * normal(rng));
            const double up = std::exp(0.5 * spec.volatility * std::abs(normal(rng)));
            const double down = std::exp(-0.5 * spec.volatility * std::abs(normal(rng)));
            s.rows.push_back({calendar[t], prev, std::max(prev, close) * up, std::min(prev, close) * down, close});
            prev = close;
        }
        out.push_back(std::move(s));
    }
    return out;
}

MarketFrame trending_frame(std::span<const double> growth, std::size_t length, double start_price, Date start) {
    const auto calendar = make_calendar(start, length, false);
    std::vector<std::string> tickers;
    std::vector<double> opens, highs, lows, closes;
    for (std::size_t i = 0; i < growth.size(); ++i) {
        tickers.push_back("A" + std::to_string(i + 1));
        for (std::size_t t = 0; t < length; ++t) {
            const double close = start_price * std::pow(growth[i], static_cast<double>(t));
            const double open = t == 0 ? close : start_price * std::pow(growth[i], static_cast<double>(t - 1));
            opens.push_back(open);
            closes.push_back(close);
            highs.push_back(std::max(open, close));
            lows.push_back(std::min(open, close));
        }
    }
    return MarketFrame(std::move(tickers), calendar, std::move(opens), std::move(highs), std::move(lows),
                       std::move(closes));
}

void write_ohlc_csv(std::ostream& out, const AssetSeries& series) {
    out << "date,open,high,low,close\n";
    char buf[160];
    for (const auto& r : series.rows) {
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g,%.17g\n", r.open, r.high, r.low, r.close);
        out << format_date(r.date) << buf;
    }
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticMarketSpec& spec) {
    std::filesystem::create_directories(dir);
    const auto manifest_path = dir / "manifest.txt";
    std::ofstream manifest(manifest_path);
    manifest << "alignment = intersect\n";
    for (const auto& series : generate_synthetic(spec)) {
        const std::string file = series.ticker + ".csv";
        std::ofstream csv(dir / file);
        write_ohlc_csv(csv, series);
        if (!csv) throw Error(ErrorCode::IoError, "cannot write " + (dir / file).string());
        manifest << series.ticker << ' ' << file << '\n';
    }
    if (!manifest) throw Error(ErrorCode::IoError, "cannot write " + manifest_path.string());
    return manifest_path;
}

}  // namespace folio
