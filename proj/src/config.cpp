#include "sparq/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sparq/errors.hpp"

namespace sparq {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::int64_t to_int(std::string_view v, std::size_t line_no) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw MalformedRecord(line_no, "'" + std::string(v) + "' is not an integer");
    }
    return out;
}

double to_real(std::string_view v, std::size_t line_no) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw MalformedRecord(line_no, "'" + std::string(v) + "' is not a finite number");
    }
    return out;
}

bool to_bool(std::string_view v, std::size_t line_no) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw MalformedRecord(line_no, "'" + std::string(v) + "' is not a boolean");
}

// Calls handler(key, value, line_no) for every assignment in the file.
void for_each_assignment(
    std::string_view text,
    const std::function<void(std::string_view, std::string_view, std::size_t)>& handle) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw MalformedRecord(line_no, "expected 'key = value'");
        }
        handle(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
    }
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view text) {
    PipelineConfig cfg;
    for_each_assignment(text, [&](std::string_view key, std::string_view value,
                                  std::size_t line_no) {
        if (key == "window_s") {
            cfg.window.window_s = to_int(value, line_no);
        } else if (key == "critical_exposure_s") {
            cfg.window.critical_exposure_s = to_int(value, line_no);
        } else if (key == "grid_origin_t") {
            cfg.window.grid_origin_t = to_int(value, line_no);
        } else if (key == "override_nyquist") {
            cfg.window.override_nyquist = to_bool(value, line_no);
        } else if (key == "cell_m") {
            cfg.quant.cell_m = to_real(value, line_no);
        } else {
            throw MalformedRecord(line_no, "unknown key '" + std::string(key) + "'");
        }
    });
    if (cfg.window.window_s <= 0 || cfg.window.critical_exposure_s <= 0) {
        throw MalformedRecord(0, "window_s and critical_exposure_s must be positive");
    }
    if (cfg.quant.cell_m <= 0.0) {
        throw MalformedRecord(0, "cell_m must be positive");
    }
    return cfg;
}

RiskPolicy parse_risk_policy(std::string_view text) {
    RiskPolicy policy;
    for_each_assignment(text, [&](std::string_view key, std::string_view value,
                                  std::size_t line_no) {
        if (key == "vigilance_threshold_s") {
            policy.vigilance_threshold_s = to_int(value, line_no);
        } else if (key == "isolate_threshold_s") {
            policy.isolate_threshold_s = to_int(value, line_no);
        } else if (key == "isolate_days_min") {
            policy.isolate_days_min = static_cast<std::int32_t>(to_int(value, line_no));
        } else if (key == "isolate_days_max") {
            policy.isolate_days_max = static_cast<std::int32_t>(to_int(value, line_no));
        } else if (key == "count_lagged") {
            policy.count_lagged = to_bool(value, line_no);
        } else if (key.starts_with("lag_weight.")) {
            const std::int64_t lag = to_int(key.substr(11), line_no);
            if (lag < 1) {
                throw MalformedRecord(line_no, "lag offsets start at 1");
            }
            policy.lag_weights[static_cast<std::uint32_t>(lag)] =
                to_real(value, line_no);
        } else {
            throw MalformedRecord(line_no, "unknown key '" + std::string(key) + "'");
        }
    });
    validate_policy(policy);
    return policy;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace sparq
