#include "folio/market_data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "folio/errors.hpp"

namespace folio {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n\"";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
    return v;
}

void validate_row(const OhlcRow& r, const std::string& ticker) {
    const bool positive = r.open > 0.0 && r.high > 0.0 && r.low > 0.0 && r.close > 0.0;
    const bool ordered = r.low <= r.close && r.close <= r.high && r.low <= r.open && r.open <= r.high;
    if (!positive || !ordered) {
        throw Error(ErrorCode::OhlcOrderingViolation,
                    ticker + " on " + format_date(r.date) + " (open " + std::to_string(r.open) +
                        ", high " + std::to_string(r.high) + ", low " + std::to_string(r.low) +
                        ", close " + std::to_string(r.close) + ")");
    }
}

void fnv_mix(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse = [](std::string_view s, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size();
    };
    if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

AssetSeries parse_ohlc_csv(std::istream& in, std::string ticker) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw Error(ErrorCode::EmptySeries, ticker + ": no header row");

    const char sep = line.find(',') != std::string::npos ? ',' : ';';
    const auto header = split_fields(line, sep);
    constexpr std::array<const char*, 5> required{"date", "open", "high", "low", "close"};
    std::array<std::size_t, 5> col{};
    for (std::size_t k = 0; k < required.size(); ++k) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](std::string_view h) { return lower(h) == required[k]; });
        if (it == header.end()) {
            throw Error(ErrorCode::MissingColumn, ticker + ": header lacks '" + required[k] + "'");
        }
        col[k] = static_cast<std::size_t>(it - header.begin());
    }
    const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;

    AssetSeries series{std::move(ticker), {}};
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, sep);
        auto fail = [&](const std::string& why) {
            return Error(ErrorCode::UnparsableRow,
                         series.ticker + " line " + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() < needed) throw fail("expected at least " + std::to_string(needed) + " fields");
        const auto date = parse_date(fields[col[0]]);
        if (!date) throw fail("bad date '" + std::string(fields[col[0]]) + "'");
        OhlcRow row{*date};
        double* targets[4] = {&row.open, &row.high, &row.low, &row.close};
        for (std::size_t k = 1; k < 5; ++k) {
            const auto v = parse_double(fields[col[k]]);
            if (!v) throw fail("bad " + std::string(required[k]) + " '" + std::string(fields[col[k]]) + "'");
            *targets[k - 1] = *v;
        }
        series.rows.push_back(row);
    }
    if (series.rows.empty()) throw Error(ErrorCode::EmptySeries, series.ticker + ": no data rows");

    std::stable_sort(series.rows.begin(), series.rows.end(),
                     [](const OhlcRow& a, const OhlcRow& b) { return a.date < b.date; });
    for (std::size_t i = 0; i < series.rows.size(); ++i) {
        if (i > 0 && series.rows[i].date == series.rows[i - 1].date) {
            throw Error(ErrorCode::UnparsableRow,
                        series.ticker + ": duplicate date " + format_date(series.rows[i].date));
        }
        validate_row(series.rows[i], series.ticker);
    }
    return series;
}

AssetSeries load_ohlc_csv(const std::filesystem::path& path, std::string ticker) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_ohlc_csv(in, std::move(ticker));
}

std::string_view to_string(AlignmentPolicy policy) {
    return policy == AlignmentPolicy::intersect ? "intersect" : "forward_fill";
}

std::optional<AlignmentPolicy> parse_alignment_policy(std::string_view text) {
    const auto t = lower(trim(text));
    if (t == "intersect") return AlignmentPolicy::intersect;
    if (t == "forward_fill") return AlignmentPolicy::forward_fill;
    return std::nullopt;
}

MarketFrame::MarketFrame(std::vector<std::string> tickers, std::vector<Date> calendar,
                         std::vector<double> opens, std::vector<double> highs,
                         std::vector<double> lows, std::vector<double> closes)
    : tickers_(std::move(tickers)),
      calendar_(std::move(calendar)),
      opens_(std::move(opens)),
      highs_(std::move(highs)),
      lows_(std::move(lows)),
      closes_(std::move(closes)) {
    const std::size_t cells = tickers_.size() * calendar_.size();
    if (opens_.size() != cells || highs_.size() != cells || lows_.size() != cells ||
        closes_.size() != cells) {
        throw Error(ErrorCode::ShapeMismatch,
                    "market frame matrices must hold n * L = " + std::to_string(cells) + " cells");
    }
    for (std::size_t t = 1; t < calendar_.size(); ++t) {
        if (!(calendar_[t - 1] < calendar_[t])) {
            throw Error(ErrorCode::UnparsableRow, "calendar not strictly increasing at " +
                                                      format_date(calendar_[t]));
        }
    }
}

MarketFrame MarketFrame::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > length()) {
        throw Error(ErrorCode::IndexOutOfRange, "slice [" + std::to_string(begin) + ", " +
                                                    std::to_string(end) + ") of length " +
                                                    std::to_string(length()));
    }
    const std::size_t len = end - begin;
    std::vector<double> o, h, l, c;
    o.reserve(n_assets() * len);
    h.reserve(n_assets() * len);
    l.reserve(n_assets() * len);
    c.reserve(n_assets() * len);
    for (std::size_t i = 0; i < n_assets(); ++i) {
        const std::size_t base = i * length();
        o.insert(o.end(), opens_.begin() + base + begin, opens_.begin() + base + end);
        h.insert(h.end(), highs_.begin() + base + begin, highs_.begin() + base + end);
        l.insert(l.end(), lows_.begin() + base + begin, lows_.begin() + base + end);
        c.insert(c.end(), closes_.begin() + base + begin, closes_.begin() + base + end);
    }
    return MarketFrame(tickers_, {calendar_.begin() + begin, calendar_.begin() + end},
                       std::move(o), std::move(h), std::move(l), std::move(c));
}

MarketFrame MarketFrame::scaled(std::span<const double> divisors) const {
    if (divisors.size() != n_assets()) {
        throw Error(ErrorCode::TickerMismatch, "expected " + std::to_string(n_assets()) +
                                                   " divisors, got " + std::to_string(divisors.size()));
    }
    auto o = opens_, h = highs_, l = lows_, c = closes_;
    for (std::size_t i = 0; i < n_assets(); ++i) {
        for (std::size_t t = 0; t < length(); ++t) {
            const std::size_t k = i * length() + t;
            o[k] /= divisors[i];
            h[k] /= divisors[i];
            l[k] /= divisors[i];
            c[k] /= divisors[i];
        }
    }
    return MarketFrame(tickers_, calendar_, std::move(o), std::move(h), std::move(l), std::move(c));
}

std::optional<std::size_t> MarketFrame::index_of(Date date) const {
    auto it = std::lower_bound(calendar_.begin(), calendar_.end(), date);
    if (it == calendar_.end() || *it != date) return std::nullopt;
    return static_cast<std::size_t>(it - calendar_.begin());
}

std::uint64_t MarketFrame::checksum() const {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& t : tickers_) fnv_mix(h, t.data(), t.size());
    for (const auto& d : calendar_) {
        const auto days = std::chrono::sys_days(d).time_since_epoch().count();
        fnv_mix(h, &days, sizeof(days));
    }
    for (const auto* m : {&opens_, &highs_, &lows_, &closes_}) {
        fnv_mix(h, m->data(), m->size() * sizeof(double));
    }
    return h;
}

std::vector<AssetSeries> to_series(const MarketFrame& frame) {
    std::vector<AssetSeries> out;
    for (std::size_t i = 0; i < frame.n_assets(); ++i) {
        AssetSeries s{frame.tickers()[i], {}};
        for (std::size_t t = 0; t < frame.length(); ++t) {
            s.rows.push_back({frame.calendar()[t], frame.open(i, t), frame.high(i, t),
                              frame.low(i, t), frame.close(i, t)});
        }
        out.push_back(std::move(s));
    }
    return out;
}

MarketFrame align_assets(std::span<const AssetSeries> series, AlignmentPolicy policy) {
    if (series.empty()) throw Error(ErrorCode::EmptySeries, "no asset series to align");
    for (const auto& s : series) {
        if (s.rows.empty()) throw Error(ErrorCode::EmptySeries, s.ticker + " has no rows");
    }

    std::vector<Date> calendar;
    if (policy == AlignmentPolicy::intersect) {
        std::vector<Date> common;
        for (const auto& r : series.front().rows) common.push_back(r.date);
        for (std::size_t k = 1; k < series.size(); ++k) {
            std::vector<Date> dates, next;
            for (const auto& r : series[k].rows) dates.push_back(r.date);
            std::set_intersection(common.begin(), common.end(), dates.begin(), dates.end(),
                                  std::back_inserter(next));
            common = std::move(next);
        }
        if (common.empty()) throw Error(ErrorCode::EmptyIntersection, "assets share no common date");
        calendar = std::move(common);
    } else {
        std::set<Date> all;
        Date start = series.front().rows.front().date;
        for (const auto& s : series) {
            for (const auto& r : s.rows) all.insert(r.date);
            start = std::max(start, s.rows.front().date);
        }
        // Leading dates where some asset has no prior row are trimmed.
        for (const auto& d : all) {
            if (!(d < start)) calendar.push_back(d);
        }
        if (calendar.empty()) throw Error(ErrorCode::NoCommonStart, "no date where every asset has history");
    }

    const std::size_t n = series.size();
    const std::size_t len = calendar.size();
    std::vector<std::string> tickers;
    std::vector<double> o(n * len), h(n * len), l(n * len), c(n * len);
    for (std::size_t i = 0; i < n; ++i) {
        tickers.push_back(series[i].ticker);
        const auto& rows = series[i].rows;
        std::size_t r = 0;
        for (std::size_t t = 0; t < len; ++t) {
            while (r + 1 < rows.size() && !(calendar[t] < rows[r + 1].date)) ++r;
            // rows[r] is the latest row dated on or before calendar[t]
            const OhlcRow& row = rows[r];
            const std::size_t k = i * len + t;
            o[k] = row.open;
            h[k] = row.high;
            l[k] = row.low;
            c[k] = row.close;
        }
    }
    return MarketFrame(std::move(tickers), std::move(calendar), std::move(o), std::move(h),
                       std::move(l), std::move(c));
}

PeriodSplit split_periods(const MarketFrame& frame, DateRange train_range, DateRange test_range,
                          std::size_t time_window) {
    if (!(train_range.last < test_range.first) || test_range.last < test_range.first ||
        train_range.last < train_range.first) {
        throw Error(ErrorCode::RangesOverlap,
                    "train [" + format_date(train_range.first) + ", " + format_date(train_range.last) +
                        "] must end before test [" + format_date(test_range.first) + ", " +
                        format_date(test_range.last) + "]");
    }
    const auto& cal = frame.calendar();
    auto lo = [&](Date d) {
        return static_cast<std::size_t>(std::lower_bound(cal.begin(), cal.end(), d) - cal.begin());
    };
    auto hi = [&](Date d) {
        return static_cast<std::size_t>(std::upper_bound(cal.begin(), cal.end(), d) - cal.begin());
    };
    const std::size_t train_begin = lo(train_range.first), train_end = hi(train_range.last);
    const std::size_t test_begin = lo(test_range.first), test_end = hi(test_range.last);
    if (train_end <= train_begin || test_end <= test_begin) {
        throw Error(ErrorCode::IndexOutOfRange, "train or test range does not intersect the calendar");
    }
    const std::size_t train_len = train_end - train_begin;
    if (time_window == 0 || train_len < time_window + 1) {
        throw Error(ErrorCode::InsufficientTrainLength,
                    "train period has " + std::to_string(train_len) + " rows, window " +
                        std::to_string(time_window) + " needs at least " +
                        std::to_string(time_window + 1));
    }

    PeriodSplit split;
    split.train = frame.slice(train_begin, train_end);
    split.train_range = train_range;
    split.test_range = test_range;
    split.boundary = time_window - 1;

    // Prefix: the final (window - 1) training rows, then the genuine test rows.
    const MarketFrame prefix = split.train.slice(train_len - split.boundary, train_len);
    const MarketFrame body = frame.slice(test_begin, test_end);
    std::vector<Date> cal_out(prefix.calendar());
    cal_out.insert(cal_out.end(), body.calendar().begin(), body.calendar().end());
    const std::size_t len = cal_out.size();
    const std::size_t n = frame.n_assets();
    std::vector<double> o(n * len), h(n * len), l(n * len), c(n * len);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < len; ++t) {
            const bool in_prefix = t < prefix.length();
            const MarketFrame& src = in_prefix ? prefix : body;
            const std::size_t st = in_prefix ? t : t - prefix.length();
            const std::size_t k = i * len + t;
            o[k] = src.open(i, st);
            h[k] = src.high(i, st);
            l[k] = src.low(i, st);
            c[k] = src.close(i, st);
        }
    }
    split.test = MarketFrame(frame.tickers(), std::move(cal_out), std::move(o), std::move(h),
                             std::move(l), std::move(c));
    return split;
}

RelativeVector price_relatives(const MarketFrame& frame, std::size_t t) {
    if (t < 1 || t >= frame.length()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "price relative at step " + std::to_string(t) + " of " + std::to_string(frame.length()));
    }
    RelativeVector rel{std::vector<double>(frame.n_assets() + 1)};
    rel.y[0] = 1.0;
    for (std::size_t i = 0; i < frame.n_assets(); ++i) {
        rel.y[i + 1] = frame.close(i, t) / frame.close(i, t - 1);
    }
    return rel;
}

PortfolioManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
    PortfolioManifest manifest;
    const auto base = path.parent_path();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        if (const auto eq = text.find('='); eq != std::string_view::npos) {
            const auto key = lower(trim(text.substr(0, eq)));
            const auto value = trim(text.substr(eq + 1));
            if (key != "alignment") {
                throw Error(ErrorCode::InvalidConfig, path.string() + ":" + std::to_string(line_no) +
                                                          ": unknown key '" + key + "'");
            }
            const auto policy = parse_alignment_policy(value);
            if (!policy) {
                throw Error(ErrorCode::InvalidConfig,
                            path.string() + ": unknown alignment '" + std::string(value) + "'");
            }
            manifest.alignment = *policy;
            continue;
        }
        auto sep = text.find_first_of(", \t");
        if (sep == std::string_view::npos) {
            throw Error(ErrorCode::InvalidConfig,
                        path.string() + ":" + std::to_string(line_no) + ": expected 'TICKER path'");
        }
        const auto ticker = trim(text.substr(0, sep));
        auto rest = text.substr(sep + 1);
        rest = trim(rest.substr(rest.find_first_not_of(", \t") == std::string_view::npos
                                    ? rest.size()
                                    : rest.find_first_not_of(", \t")));
        std::filesystem::path csv{std::string(rest)};
        if (csv.is_relative()) csv = base / csv;
        manifest.assets.emplace_back(std::string(ticker), csv);
    }
    if (manifest.assets.empty()) throw Error(ErrorCode::InvalidConfig, path.string() + " lists no assets");
    return manifest;
}

MarketFrame load_portfolio(const PortfolioManifest& manifest) {
    std::vector<AssetSeries> series;
    for (const auto& [ticker, csv] : manifest.assets) series.push_back(load_ohlc_csv(csv, ticker));
    return align_assets(series, manifest.alignment);
}

}  // namespace folio
