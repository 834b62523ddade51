#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "folio/market_data.hpp"

namespace folio {

/// Seeded regime-switching random walk: each asset's per-step log drift is redrawn
/// from N(0, drift_sd) with probability 1 - persistence, returns add N(0, volatility).
struct SyntheticMarketSpec {
    std::vector<std::string> tickers;
    std::size_t length = 0;
    Date start{std::chrono::year{2015}, std::chrono::month{1}, std::chrono::day{1}};
    bool weekdays_only = false;
    std::uint64_t seed = 0;
    double drift_sd = 0.003;
    double persistence = 0.98;
    double volatility = 0.04;
    double start_price = 100.0;
};

std::vector<AssetSeries> generate_synthetic(const SyntheticMarketSpec& spec);

/// Noise-free frame on a daily calendar: close_i(t) = start * growth_i^t, open =
/// previous close, high/low bracket open and close.
MarketFrame trending_frame(std::span<const double> growth, std::size_t length, double start_price = 1.0,
                           Date start = Date{std::chrono::year{2020}, std::chrono::month{1}, std::chrono::day{1}});

void write_ohlc_csv(std::ostream& out, const AssetSeries& series);

/// Writes <ticker>.csv per asset plus manifest.txt (intersect alignment) into `dir`.
/// Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticMarketSpec& spec);

}  // namespace folio
