#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "folio/market_data.hpp"
#include "folio/tensor.hpp"

namespace folio {

/// Feature planes of a state, in order.
enum Feature : std::size_t { kClose = 0, kHigh = 1, kLow = 2, kFeatureCount = 3 };

/// Raw prices for the window ending at decision step `step` (inclusive):
/// values has shape (3, n, window) with planes (close, high, low).
struct RawWindow {
    ad::Tensor values;
    std::size_t step = 0;
};

/// Normalized observation consumed by the policy; same layout as RawWindow.
struct StateTensor {
    ad::Tensor values;
    std::size_t step = 0;

    std::size_t n_assets() const { return values.dim(1); }
    std::size_t window() const { return values.dim(2); }
    bool operator==(const StateTensor&) const = default;
};

/// Columns [step - window + 1, step] of closes/highs/lows.
/// Throws Error{WindowOutOfRange} if step < window - 1 or step >= L.
RawWindow extract_window(const MarketFrame& frame, std::size_t step, std::size_t window);

enum class NormalizationKind { last_close, last_price, data_max };

std::string_view to_string(NormalizationKind kind);
std::optional<NormalizationKind> parse_normalization(std::string_view text);

/// One of three input normalizations. last_close and last_price are stateless
/// functions of the window; data_max carries one positive scale per asset fitted
/// on training rows only.
class NormalizationScheme {
public:
    static NormalizationScheme last_close();
    static NormalizationScheme last_price();
    static NormalizationScheme data_max(std::vector<std::string> tickers, std::vector<double> scales);

    NormalizationKind kind() const noexcept { return kind_; }
    const std::vector<double>& scales() const noexcept { return scales_; }
    const std::vector<std::string>& tickers() const noexcept { return tickers_; }

    /// True when the scheme acts per window at state-construction time.
    bool is_state_normalization() const noexcept { return kind_ != NormalizationKind::data_max; }

private:
    explicit NormalizationScheme(NormalizationKind kind) : kind_(kind) {}

    NormalizationKind kind_;
    std::vector<std::string> tickers_;
    std::vector<double> scales_;
};

/// Every feature of asset i divided by close_i(T).
StateTensor normalize_last_close(const RawWindow& window);
/// close / close(T), high / high(T), low / low(T), per asset.
StateTensor normalize_last_price(const RawWindow& window);

/// scale_i = max over training rows of high_i.
NormalizationScheme fit_data_max(const MarketFrame& train);
/// Divides every feature of asset i by scale_i; the result may exceed 1 outside
/// the fitting period. Throws Error{TickerMismatch} if the tickers differ.
MarketFrame apply_data_max(const NormalizationScheme& scheme, const MarketFrame& frame);

/// Applies a state normalization; data_max passes the (pre-scaled) window through unchanged.
StateTensor normalize_window(const NormalizationScheme& scheme, const RawWindow& window);

}  // namespace folio
