#include "folio/normalization.hpp"

#include <algorithm>

#include "folio/errors.hpp"

namespace folio {

RawWindow extract_window(const MarketFrame& frame, std::size_t step, std::size_t window) {
    if (window == 0 || step + 1 < window || step >= frame.length()) {
        throw Error(ErrorCode::WindowOutOfRange, "window of " + std::to_string(window) +
                                                     " ending at step " + std::to_string(step) +
                                                     " in a frame of length " +
                                                     std::to_string(frame.length()));
    }
    const std::size_t n = frame.n_assets();
    const std::size_t first = step + 1 - window;
    RawWindow raw{ad::Tensor({kFeatureCount, n, window}), step};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < window; ++k) {
            raw.values.at(kClose, i, k) = frame.close(i, first + k);
            raw.values.at(kHigh, i, k) = frame.high(i, first + k);
            raw.values.at(kLow, i, k) = frame.low(i, first + k);
        }
    }
    return raw;
}

std::string_view to_string(NormalizationKind kind) {
    switch (kind) {
        case NormalizationKind::last_close: return "last_close";
        case NormalizationKind::last_price: return "last_price";
        case NormalizationKind::data_max: return "data_max";
    }
    return "unknown";
}

std::optional<NormalizationKind> parse_normalization(std::string_view text) {
    if (text == "last_close") return NormalizationKind::last_close;
    if (text == "last_price") return NormalizationKind::last_price;
    if (text == "data_max") return NormalizationKind::data_max;
    return std::nullopt;
}

NormalizationScheme NormalizationScheme::last_close() {
    return NormalizationScheme(NormalizationKind::last_close);
}

NormalizationScheme NormalizationScheme::last_price() {
    return NormalizationScheme(NormalizationKind::last_price);
}

NormalizationScheme NormalizationScheme::data_max(std::vector<std::string> tickers,
                                                  std::vector<double> scales) {
    if (tickers.size() != scales.size()) {
        throw Error(ErrorCode::TickerMismatch, "one scale per ticker required");
    }
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0)) {
            throw Error(ErrorCode::NonPositiveScale,
                        tickers[i] + " has scale " + std::to_string(scales[i]));
        }
    }
    NormalizationScheme s(NormalizationKind::data_max);
    s.tickers_ = std::move(tickers);
    s.scales_ = std::move(scales);
    return s;
}

StateTensor normalize_last_close(const RawWindow& window) {
    StateTensor out{window.values, window.step};
    const std::size_t n = out.values.dim(1), t = out.values.dim(2);
    for (std::size_t i = 0; i < n; ++i) {
        const double divisor = window.values.at(kClose, i, t - 1);
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            for (std::size_t k = 0; k < t; ++k) out.values.at(f, i, k) /= divisor;
    }
    return out;
}

StateTensor normalize_last_price(const RawWindow& window) {
    StateTensor out{window.values, window.step};
    const std::size_t n = out.values.dim(1), t = out.values.dim(2);
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        for (std::size_t i = 0; i < n; ++i) {
            const double divisor = window.values.at(f, i, t - 1);
            for (std::size_t k = 0; k < t; ++k) out.values.at(f, i, k) /= divisor;
        }
    return out;
}

NormalizationScheme fit_data_max(const MarketFrame& train) {
    if (train.length() == 0 || train.n_assets() == 0) {
        throw Error(ErrorCode::EmptySeries, "cannot fit data_max on an empty frame");
    }
    std::vector<double> scales(train.n_assets());
    for (std::size_t i = 0; i < train.n_assets(); ++i) {
        const auto highs = train.highs().subspan(i * train.length(), train.length());
        scales[i] = *std::max_element(highs.begin(), highs.end());
    }
    return NormalizationScheme::data_max(train.tickers(), std::move(scales));
}

MarketFrame apply_data_max(const NormalizationScheme& scheme, const MarketFrame& frame) {
    if (scheme.kind() != NormalizationKind::data_max) {
        throw Error(ErrorCode::InvalidConfig, "apply_data_max needs a fitted data_max scheme");
    }
    if (scheme.tickers() != frame.tickers()) {
        throw Error(ErrorCode::TickerMismatch, "scheme was fitted on different tickers");
    }
    return frame.scaled(scheme.scales());
}

StateTensor normalize_window(const NormalizationScheme& scheme, const RawWindow& window) {
    switch (scheme.kind()) {
        case NormalizationKind::last_close: return normalize_last_close(window);
        case NormalizationKind::last_price: return normalize_last_price(window);
        case NormalizationKind::data_max: break;
    }
    return StateTensor{window.values, window.step};
}

}  // namespace folio
