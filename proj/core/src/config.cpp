#include "folio/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "folio/errors.hpp"

namespace folio {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
    throw Error(ErrorCode::InvalidConfig, key + " = '" + value + "': " + why);
}

std::size_t to_count(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "expected a non-negative integer");
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "expected a number");
    return out;
}

Date to_date(const std::string& key, const std::string& v) {
    auto d = parse_date(v);
    if (!d) bad(key, v, "expected YYYY-MM-DD");
    return *d;
}

std::string real_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

PolicyConfig ExperimentConfig::policy_config(std::size_t n_assets) const {
    PolicyConfig p;
    p.n_assets = n_assets;
    p.window = time_window;
    p.kernel_width = kernel_width;
    p.conv1_channels = conv1_channels;
    p.conv2_channels = conv2_channels;
    return p;
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    bool have_manifest = false, have_train_start = false, have_train_end = false;
    bool have_test_start = false, have_test_end = false;

    const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters{
        {"manifest", [&](auto&, auto& v) { c.manifest = v; have_manifest = true; }},
        {"alignment", [&](auto& k, auto& v) {
             auto p = parse_alignment_policy(v);
             if (!p) bad(k, v, "expected intersect or forward_fill");
             c.alignment = *p;
         }},
        {"train_start", [&](auto& k, auto& v) { c.train_range.first = to_date(k, v); have_train_start = true; }},
        {"train_end", [&](auto& k, auto& v) { c.train_range.last = to_date(k, v); have_train_end = true; }},
        {"test_start", [&](auto& k, auto& v) { c.test_range.first = to_date(k, v); have_test_start = true; }},
        {"test_end", [&](auto& k, auto& v) { c.test_range.last = to_date(k, v); have_test_end = true; }},
        {"normalization", [&](auto& k, auto& v) {
             c.methods.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ',')) {
                 auto m = parse_normalization(trim(item));
                 if (!m) bad(k, v, "expected last_close, last_price or data_max");
                 c.methods.push_back(*m);
             }
         }},
        {"learning_rate", [&](auto& k, auto& v) { c.trainer.learning_rate = to_real(k, v); }},
        {"batch_size", [&](auto& k, auto& v) { c.trainer.batch_size = to_count(k, v); }},
        {"sample_bias", [&](auto& k, auto& v) { c.trainer.sample_bias = to_real(k, v); }},
        {"steps", [&](auto& k, auto& v) { c.trainer.steps = to_count(k, v); }},
        {"online_steps", [&](auto& k, auto& v) { c.trainer.online_steps = to_count(k, v); }},
        {"weight_decay", [&](auto& k, auto& v) { c.trainer.weight_decay = to_real(k, v); }},
        {"adam_beta1", [&](auto& k, auto& v) { c.trainer.beta1 = to_real(k, v); }},
        {"adam_beta2", [&](auto& k, auto& v) { c.trainer.beta2 = to_real(k, v); }},
        {"adam_epsilon", [&](auto& k, auto& v) { c.trainer.epsilon = to_real(k, v); }},
        {"mu_gradient", [&](auto& k, auto& v) {
             auto m = parse_mu_gradient(v);
             if (!m) bad(k, v, "expected implicit or constant");
             c.trainer.mu_gradient = *m;
         }},
        {"log_every", [&](auto& k, auto& v) { c.trainer.log_every = to_count(k, v); }},
        {"time_window", [&](auto& k, auto& v) { c.time_window = to_count(k, v); }},
        {"commission_rate", [&](auto& k, auto& v) { c.commission_rate = to_real(k, v); }},
        {"initial_value", [&](auto& k, auto& v) { c.initial_value = to_real(k, v); }},
        {"runs", [&](auto& k, auto& v) { c.runs = to_count(k, v); }},
        {"base_seed", [&](auto& k, auto& v) {
             std::uint64_t s = 0;
             auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
             if (ec != std::errc() || p != v.data() + v.size()) bad(k, v, "expected an unsigned integer");
             c.base_seed = s;
         }},
        {"validation_points", [&](auto& k, auto& v) { c.validation_points = to_count(k, v); }},
        {"kernel_width", [&](auto& k, auto& v) { c.kernel_width = to_count(k, v); }},
        {"conv1_channels", [&](auto& k, auto& v) { c.conv1_channels = to_count(k, v); }},
        {"conv2_channels", [&](auto& k, auto& v) { c.conv2_channels = to_count(k, v); }},
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        it->second(key, value);
    }
    if (!have_manifest) throw Error(ErrorCode::InvalidConfig, "missing key 'manifest'");
    if (!have_train_start || !have_train_end || !have_test_start || !have_test_end) {
        throw Error(ErrorCode::InvalidConfig, "train_start, train_end, test_start and test_end are required");
    }
    if (c.manifest.is_relative() && !base_dir.empty()) c.manifest = base_dir / c.manifest;
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
    return parse_config(in, path.parent_path());
}

void validate_config(const ExperimentConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw Error(ErrorCode::InvalidConfig, what);
    };
    require(c.trainer.learning_rate >= 0.0, "learning_rate must be non-negative");
    require(c.trainer.batch_size > 0, "batch_size must be positive");
    require(c.trainer.sample_bias > 0.0 && c.trainer.sample_bias <= 1.0, "sample_bias must lie in (0, 1]");
    require(c.trainer.weight_decay >= 0.0, "weight_decay must be non-negative");
    require(c.trainer.beta1 >= 0.0 && c.trainer.beta1 < 1.0, "adam_beta1 must lie in [0, 1)");
    require(c.trainer.beta2 >= 0.0 && c.trainer.beta2 < 1.0, "adam_beta2 must lie in [0, 1)");
    require(c.trainer.epsilon > 0.0, "adam_epsilon must be positive");
    require(c.time_window >= c.kernel_width + 1, "time_window must exceed kernel_width");
    require(c.commission_rate >= 0.0 && c.commission_rate < 1.0, "commission_rate must lie in [0, 1)");
    require(c.initial_value > 0.0, "initial_value must be positive");
    require(c.runs >= 1, "runs must be at least 1");
    require(!c.methods.empty(), "normalization lists no method");
    require(c.kernel_width > 0 && c.conv1_channels > 0 && c.conv2_channels > 0,
            "network widths must be positive");
    require(c.train_range.first <= c.train_range.last, "train_start after train_end");
    require(c.test_range.first <= c.test_range.last, "test_start after test_end");
    require(c.train_range.last < c.test_range.first, "train period must end before the test period starts");
}

std::string render_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "manifest = " << c.manifest.string() << '\n';
    if (c.alignment) out << "alignment = " << to_string(*c.alignment) << '\n';
    out << "train_start = " << format_date(c.train_range.first) << '\n'
        << "train_end = " << format_date(c.train_range.last) << '\n'
        << "test_start = " << format_date(c.test_range.first) << '\n'
        << "test_end = " << format_date(c.test_range.last) << '\n';
    out << "normalization = ";
    for (std::size_t i = 0; i < c.methods.size(); ++i) out << (i ? "," : "") << to_string(c.methods[i]);
    out << '\n'
        << "learning_rate = " << real_text(c.trainer.learning_rate) << '\n'
        << "batch_size = " << c.trainer.batch_size << '\n'
        << "sample_bias = " << real_text(c.trainer.sample_bias) << '\n'
        << "steps = " << c.trainer.steps << '\n'
        << "online_steps = " << c.trainer.online_steps << '\n'
        << "time_window = " << c.time_window << '\n'
        << "commission_rate = " << real_text(c.commission_rate) << '\n'
        << "initial_value = " << real_text(c.initial_value) << '\n'
        << "runs = " << c.runs << '\n'
        << "base_seed = " << c.base_seed << '\n'
        << "weight_decay = " << real_text(c.trainer.weight_decay) << '\n'
        << "adam_beta1 = " << real_text(c.trainer.beta1) << '\n'
        << "adam_beta2 = " << real_text(c.trainer.beta2) << '\n'
        << "adam_epsilon = " << real_text(c.trainer.epsilon) << '\n'
        << "mu_gradient = " << to_string(c.trainer.mu_gradient) << '\n'
        << "log_every = " << c.trainer.log_every << '\n'
        << "validation_points = " << c.validation_points << '\n'
        << "kernel_width = " << c.kernel_width << '\n'
        << "conv1_channels = " << c.conv1_channels << '\n'
        << "conv2_channels = " << c.conv2_channels << '\n';
    return out.str();
}

}  // namespace folio
