#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "folio/types.hpp"

namespace folio {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Returns nullopt on malformed input.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

struct OhlcRow {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;

    bool operator==(const OhlcRow&) const = default;
};

struct AssetSeries {
    std::string ticker;
    std::vector<OhlcRow> rows;  // strictly increasing dates

    bool operator==(const AssetSeries&) const = default;
};

/// Reads a `date,open,high,low,close` CSV (header names case-insensitive, extra
/// columns ignored). Rows are sorted by date before validation.
AssetSeries load_ohlc_csv(const std::filesystem::path& path, std::string ticker);
AssetSeries parse_ohlc_csv(std::istream& in, std::string ticker);

enum class AlignmentPolicy { intersect, forward_fill };

std::string_view to_string(AlignmentPolicy policy);
std::optional<AlignmentPolicy> parse_alignment_policy(std::string_view text);

/// Aligned OHLC history of n risky assets over a shared calendar of length L.
/// Cash is implicit at weight index 0 with constant price 1. Immutable.
class MarketFrame {
public:
    MarketFrame() = default;
    /// Matrices are asset-major: value of asset i at step t lives at [i * L + t].
    MarketFrame(std::vector<std::string> tickers, std::vector<Date> calendar,
                std::vector<double> opens, std::vector<double> highs,
                std::vector<double> lows, std::vector<double> closes);

    std::size_t n_assets() const noexcept { return tickers_.size(); }
    std::size_t length() const noexcept { return calendar_.size(); }
    const std::vector<std::string>& tickers() const noexcept { return tickers_; }
    const std::vector<Date>& calendar() const noexcept { return calendar_; }

    double open(std::size_t asset, std::size_t t) const { return opens_[asset * length() + t]; }
    double high(std::size_t asset, std::size_t t) const { return highs_[asset * length() + t]; }
    double low(std::size_t asset, std::size_t t) const { return lows_[asset * length() + t]; }
    double close(std::size_t asset, std::size_t t) const { return closes_[asset * length() + t]; }

    std::span<const double> opens() const noexcept { return opens_; }
    std::span<const double> highs() const noexcept { return highs_; }
    std::span<const double> lows() const noexcept { return lows_; }
    std::span<const double> closes() const noexcept { return closes_; }

    /// Rows [begin, end) as a new frame.
    MarketFrame slice(std::size_t begin, std::size_t end) const;
    /// Same layout with every price of asset i divided by divisors[i].
    MarketFrame scaled(std::span<const double> divisors) const;

    std::optional<std::size_t> index_of(Date date) const;

    /// FNV-1a over tickers, dates and raw price bytes.
    std::uint64_t checksum() const;

    bool operator==(const MarketFrame&) const = default;

private:
    std::vector<std::string> tickers_;
    std::vector<Date> calendar_;
    std::vector<double> opens_;
    std::vector<double> highs_;
    std::vector<double> lows_;
    std::vector<double> closes_;
};

/// Converts one aligned frame back into per-asset series (used for re-alignment).
std::vector<AssetSeries> to_series(const MarketFrame& frame);

MarketFrame align_assets(std::span<const AssetSeries> series, AlignmentPolicy policy);

struct DateRange {
    Date first;  // inclusive
    Date last;   // inclusive

    bool contains(Date d) const { return first <= d && d <= last; }
    bool operator==(const DateRange&) const = default;
};

struct PeriodSplit {
    MarketFrame train;
    /// Test rows prefixed with the last (window - 1) training rows.
    MarketFrame test;
    DateRange train_range;
    DateRange test_range;
    /// Index into `test` of the first genuine test row (== window - 1).
    std::size_t boundary = 0;
};

PeriodSplit split_periods(const MarketFrame& frame, DateRange train_range,
                          DateRange test_range, std::size_t time_window);

/// y_t with y_0 = 1 and y_i = close_i(t) / close_i(t - 1). Requires 1 <= t < L.
RelativeVector price_relatives(const MarketFrame& frame, std::size_t t);

struct PortfolioManifest {
    std::vector<std::pair<std::string, std::filesystem::path>> assets;
    AlignmentPolicy alignment = AlignmentPolicy::intersect;
};

/// Manifest format, one entry per line (`#` starts a comment):
///
///     alignment = forward_fill
///     BTC  data/btc.csv
///     ETH, data/eth.csv
///
/// Relative CSV paths resolve against the manifest's directory.
PortfolioManifest load_manifest(const std::filesystem::path& path);
MarketFrame load_portfolio(const PortfolioManifest& manifest);

}  // namespace folio
